"""Mapping of exceptions to process exit codes."""
import logging

import click

from app.utils.exceptions import (
    BenchError,
    ConfigurationError,
    ExportError,
    FragmentError,
    OracleError,
    ParseError,
    SolverException,
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 3
EXIT_PARSE = 4
EXIT_ERROR = 5


def exit_code_for(error: BaseException) -> int:
    """
    Exit code for an exception escaping a solve.

    Args:
        error: The raised exception

    Returns:
        3 for usage and configuration errors, 4 for input errors, 5 otherwise
    """
    if isinstance(error, (click.UsageError, ConfigurationError, BenchError, OracleError)):
        return EXIT_USAGE
    if isinstance(error, (ParseError, FragmentError)):
        return EXIT_PARSE
    return EXIT_ERROR


def report(error: BaseException) -> int:
    """Print ``error`` on stderr and return its exit code."""
    code = exit_code_for(error)
    if isinstance(error, click.UsageError):
        message = error.format_message()
    elif isinstance(error, (SolverException, ExportError)):
        message = str(error)
    else:
        logger.error(f"unexpected failure: {error!r}")
        message = f"internal error: {error}"
    click.echo(f"error: {message}", err=True)
    return code
