import click
import pytest

from app.utils.error_handlers import EXIT_ERROR, EXIT_PARSE, EXIT_USAGE, exit_code_for, report
from app.utils.exceptions import (
    BenchError,
    ConfigurationError,
    ContractViolation,
    FragmentError,
    OracleError,
    ParseError,
    UnsupportedConstructError,
)


@pytest.mark.parametrize('error, code', [
    (click.UsageError("bad"), EXIT_USAGE),
    (ConfigurationError("bad"), EXIT_USAGE),
    (BenchError("bad"), EXIT_USAGE),
    (OracleError("bad"), EXIT_USAGE),
    (ParseError("bad", 1, 2), EXIT_PARSE),
    (UnsupportedConstructError("bad"), EXIT_PARSE),
    (FragmentError("bad"), EXIT_PARSE),
    (ContractViolation("bad"), EXIT_ERROR),
    (RuntimeError("bad"), EXIT_ERROR),
])
def test_exit_codes(error, code):
    assert exit_code_for(error) == code


def test_parse_error_message_has_position():
    assert str(ParseError("missing ')'", 3, 7)) == "3:7: missing ')'"


def test_report_prints_to_stderr(capsys):
    assert report(ConfigurationError("radius must be at least 1")) == EXIT_USAGE
    captured = capsys.readouterr()
    assert captured.out == ''
    assert captured.err == "error: radius must be at least 1\n"


def test_unexpected_errors_are_internal(capsys):
    assert report(KeyError('x')) == EXIT_ERROR
    assert capsys.readouterr().err.startswith('error: internal error:')
