"""Configuration package for BoundRelax."""
from .settings import (
    BenchConfig,
    Config,
    DevelopmentConfig,
    Mode,
    SolverConfig,
    Strategy,
    TestingConfig,
    get_config,
)

__all__ = [
    'Config', 'DevelopmentConfig', 'BenchConfig', 'TestingConfig', 'get_config',
    'Mode', 'Strategy', 'SolverConfig',
]
