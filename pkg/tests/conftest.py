import logging
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

import app
from app.services.smtlib_service import parse_ea_script, parse_script
from app.utils.budget import raise_recursion_limit
from config.settings import Mode, SolverConfig, Strategy, TestingConfig
from tests.factories import EA_EXAMPLE, RUNNING_EXAMPLE, SOFT_EXAMPLE, UNSAT_EXAMPLE

settings.register_profile("dev", max_examples=25, deadline=None)
settings.register_profile(
    "ci", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def running_script():
    return parse_script(RUNNING_EXAMPLE)


@pytest.fixture
def running_formula(running_script):
    return running_script.formula


@pytest.fixture
def soft_formula():
    return parse_script(SOFT_EXAMPLE).formula


@pytest.fixture
def ea_problem():
    return parse_ea_script(EA_EXAMPLE)


@pytest.fixture
def make_config():
    def _make(strategy=Strategy.MAXSMT, mode=Mode.SMT, **kwargs):
        kwargs.setdefault('timeout', 60.0)
        return SolverConfig(mode=mode, strategy=strategy, **kwargs)
    return _make


@pytest.fixture
def smt2_dir(tmp_path):
    """Directory with a sat, an unsat and an unreadable instance."""
    (tmp_path / "running.smt2").write_text(RUNNING_EXAMPLE)
    (tmp_path / "unsat.smt2").write_text(UNSAT_EXAMPLE)
    (tmp_path / "broken.smt2").write_text("(assert (> x 0)")
    (tmp_path / "notes.txt").write_text("not an instance")
    return tmp_path


@pytest.fixture
def write_smt2(tmp_path):
    def _write(text, name="input.smt2"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


@pytest.fixture(autouse=True)
def fresh_logging(monkeypatch):
    """Each test configures logging against its own captured streams."""
    logger = logging.getLogger('app')
    saved = (list(logger.handlers), logger.level, logger.propagate)
    monkeypatch.setattr(app, '_configured', False)
    yield
    logger.handlers, logger.level, logger.propagate = saved


@pytest.fixture(scope='session', autouse=True)
def search_recursion_limit():
    """Engines called directly need the limit the command line sets."""
    before = sys.getrecursionlimit()
    raise_recursion_limit(TestingConfig.RECURSION_LIMIT)
    yield
    sys.setrecursionlimit(before)
