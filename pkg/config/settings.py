"""
Configuration settings for BoundRelax.
Supports multiple environments; runtime options are validated with pydantic.
"""
import os
from enum import Enum
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.utils.exceptions import ConfigurationError


load_dotenv()


class Config:
    """Base configuration."""

    # Application
    APP_NAME = "BoundRelax"
    VERSION = "1.0.0"
    ENV = os.getenv('SOLVER_ENV', 'development')

    # Solving
    DEFAULT_MODE = 'smt'
    DEFAULT_STRATEGY = os.getenv('SOLVER_STRATEGY', 'maxsmt')
    TIMEOUT = float(os.getenv('SOLVER_TIMEOUT', '60'))
    ALPHA = float(os.getenv('SOLVER_ALPHA', '2'))
    BETA = float(os.getenv('SOLVER_BETA', '10'))
    RADIUS = int(os.getenv('SOLVER_RADIUS', '2'))
    SEED = int(os.getenv('SOLVER_SEED', '0'))
    MAX_BRANCH_DEPTH = int(os.getenv('SOLVER_MAX_BRANCH_DEPTH', '64'))
    # the LIA search recurses once per decision
    RECURSION_LIMIT = int(os.getenv('SOLVER_RECURSION_LIMIT', '20000'))
    CORRECTION = True

    # Oracle
    ORACLE_MAX_POINTS = 10 ** 7

    # Bench
    BENCH_JOBS = int(os.getenv('SOLVER_BENCH_JOBS', '1'))

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_JSON = os.getenv('LOG_JSON', 'false').lower() in {'1', 'true', 'yes'}
    LOG_FILE = os.getenv('LOG_FILE')


class DevelopmentConfig(Config):
    """Development environment configuration."""
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'DEBUG')


class BenchConfig(Config):
    """Benchmark runs: structured logs, quiet console."""
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    LOG_JSON = True


class TestingConfig(Config):
    """Testing environment configuration."""
    TIMEOUT = 30.0
    SEED = 0
    LOG_LEVEL = 'WARNING'
    LOG_FILE = None


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'bench': BenchConfig,
    'testing': TestingConfig,
    'default': Config
}


def get_config(env=None):
    """Get configuration based on environment."""
    if env is None:
        env = os.getenv('SOLVER_ENV', 'default')
    return config.get(env, config['default'])


class Mode(str, Enum):
    SMT = 'smt'
    MAXSMT = 'maxsmt'
    EA = 'ea'


class Strategy(str, Enum):
    """Outer-loop strategy of the non-linear driver."""
    CORES = 'cores'
    MAXSMT = 'maxsmt'
    OMT = 'omt'
    JUMP = 'jump'
    JUMP_CORES = 'jump-cores'

    @property
    def non_incremental(self) -> bool:
        return self in (Strategy.JUMP, Strategy.JUMP_CORES)


class SolverConfig(BaseModel):
    """Validated options for one solve."""

    model_config = ConfigDict(frozen=True)

    mode: Mode = Mode.SMT
    strategy: Strategy = Strategy.MAXSMT
    timeout: float = 60.0
    alpha: float = 2.0
    beta: float = 10.0
    radius: int = 2
    ood_clauses: Optional[bool] = None
    correction: bool = True
    seed: int = 0
    stats: bool = False
    max_branch_depth: int = 64
    omt_lower_coeff: int = Field(default=1, ge=1)
    omt_upper_coeff: int = Field(default=1, ge=1)

    @field_validator('timeout')
    @classmethod
    def _positive_timeout(cls, value: float) -> float:
        if value <= 0:
            raise ValueError('timeout must be positive')
        return value

    @field_validator('alpha', 'beta')
    @classmethod
    def _positive_factor(cls, value: float) -> float:
        if value <= 0:
            raise ValueError('correction parameters must be positive')
        return value

    @field_validator('radius')
    @classmethod
    def _radius_at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError('radius must be at least 1')
        return value

    @field_validator('max_branch_depth')
    @classmethod
    def _depth_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError('branch depth budget must be at least 1')
        return value

    @property
    def use_ood_clauses(self) -> bool:
        if self.ood_clauses is None:
            return self.mode in (Mode.MAXSMT, Mode.EA)
        return self.ood_clauses

    @classmethod
    def from_env(cls, env_config=None, **overrides) -> "SolverConfig":
        """
        Build a validated config from an environment class plus overrides.

        Args:
            env_config: Config class (defaults to ``get_config()``)
            **overrides: Explicit values, ``None`` entries are ignored

        Returns:
            SolverConfig

        Raises:
            ConfigurationError: If any value is out of range
        """
        env_config = env_config or get_config()
        values = {
            'mode': env_config.DEFAULT_MODE,
            'strategy': env_config.DEFAULT_STRATEGY,
            'timeout': env_config.TIMEOUT,
            'alpha': env_config.ALPHA,
            'beta': env_config.BETA,
            'radius': env_config.RADIUS,
            'correction': env_config.CORRECTION,
            'seed': env_config.SEED,
            'max_branch_depth': env_config.MAX_BRANCH_DEPTH,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**values)
        except ValidationError as e:
            messages = '; '.join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise ConfigurationError(f"Invalid configuration: {messages}") from e
