"""Benchmark harness over a directory of .smt2 files."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from app.services.solver_service import SolverService
from app.utils.exceptions import BenchError, ParseError, SolverException
from config.settings import SolverConfig

logger = logging.getLogger(__name__)


class BenchService:
    """
    Solve every ``.smt2`` file of a directory and collect one record per file.

    Files that cannot be read or parsed are skipped with a warning; other
    solver errors produce a record with status ``error``.
    """

    def __init__(self, config: SolverConfig, jobs: int = 1):
        if jobs < 1:
            raise BenchError("jobs must be at least 1")
        self.config = config
        self.jobs = jobs

    def collect(self, directory: Union[str, Path]) -> List[Path]:
        root = Path(directory)
        if not root.is_dir():
            raise BenchError(f"not a directory: {root}")
        return sorted(root.glob('*.smt2'))

    def run_one(self, path: Path) -> Optional[Dict[str, Any]]:
        service = SolverService(self.config)
        started = time.perf_counter()
        try:
            text = path.read_text(encoding='utf-8')
            outcome = service.solve_text(text)
        except (OSError, UnicodeDecodeError, ParseError) as e:
            logger.warning(f"skipping {path.name}: {e}")
            return None
        except SolverException as e:
            logger.error(f"{path.name}: {e}")
            return {
                'file': path.name, 'status': 'error', 'expected': None, 'objective': None,
                'iterations': None, 'time_ms': round((time.perf_counter() - started) * 1000),
                'agrees': None,
            }
        result = outcome.result
        status = result.status.smtlib
        expected = outcome.expected_status
        agrees = None
        if expected in ('sat', 'unsat') and status in ('sat', 'unsat'):
            agrees = expected == status
        record = {
            'file': path.name,
            'status': status,
            'expected': expected,
            'objective': str(result.objective) if outcome.optimizing and result.objective is not None else None,
            'iterations': result.stats.iterations,
            'time_ms': round((time.perf_counter() - started) * 1000),
            'agrees': agrees,
        }
        logger.info(f"{path.name}: {status} in {record['time_ms']} ms")
        return record

    def run(self, directory: Union[str, Path]) -> List[Dict[str, Any]]:
        """
        Args:
            directory: Folder holding ``.smt2`` files

        Returns:
            Records in file-name order
        """
        files = self.collect(directory)
        if self.jobs == 1:
            records = [self.run_one(p) for p in files]
        else:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                records = list(pool.map(self.run_one, files))
        return [r for r in records if r is not None]
