"""Services package."""
from .bench_service import BenchService
from .export_service import ExportService
from .solver_service import SolveOutcome, SolverService

__all__ = [
    'BenchService',
    'ExportService',
    'SolveOutcome',
    'SolverService',
]
