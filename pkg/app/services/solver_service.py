"""Dispatch of parsed input to the engine selected by mode and strategy."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

from app.models.base import VarTable
from app.models.formula import WeightedFormula
from app.models.results import NiaResult, SolverStats, Status
from app.services.exists_forall import solve_ea
from app.services.export_service import format_stats, print_result
from app.services.nia_engine import solve_maxsmt, solve_smt_cores, solve_smt_min_models
from app.services.oracle_service import OracleResult, brute_force_nia
from app.services.smtlib_service import parse_ea_script, parse_script
from app.utils.budget import Budget
from app.utils.exceptions import ConfigurationError
from config.settings import Mode, SolverConfig, Strategy

logger = logging.getLogger(__name__)


@dataclass
class SolveOutcome:
    """A result with the variable table needed to print it."""

    result: NiaResult
    table: VarTable
    expected_status: Optional[str] = None
    optimizing: bool = False

    def render(self, with_stats: bool = False) -> str:
        r = self.result
        model = r.model if r.model is not None else r.best_so_far
        objective = r.objective if self.optimizing and r.status == Status.SAT else None
        text = print_result(r.status, self.table, model, objective, r.certificate)
        if with_stats:
            text += "\n" + format_stats(r.stats)
        return text


@dataclass
class SolverService:
    """
    Runs one solve per call; holds only the validated configuration.
    """

    config: SolverConfig = field(default_factory=SolverConfig)

    def budget(self) -> Budget:
        return Budget(timeout=self.config.timeout, max_branch_depth=self.config.max_branch_depth)

    def solve_file(self, path: Union[str, Path]) -> SolveOutcome:
        text = Path(path).read_text(encoding='utf-8')
        logger.info(f"solving {path} in {self.config.mode.value} mode")
        return self.solve_text(text)

    def solve_text(self, text: str) -> SolveOutcome:
        """
        Parse and solve according to the configured mode.

        Raises:
            ParseError: On malformed input
            ConfigurationError: On a strategy the mode does not support
        """
        cfg = self.config
        budget = self.budget()
        if cfg.mode == Mode.EA:
            prob = parse_ea_script(text)
            result = solve_ea(prob, cfg, budget)
            table = result.table if result.table is not None else prob.table
            return SolveOutcome(result, table, optimizing=True)
        script = parse_script(text)
        if cfg.mode == Mode.MAXSMT:
            result = solve_maxsmt(script.formula, cfg, budget)
            return SolveOutcome(result, script.table, script.expected_status, optimizing=True)
        if script.formula.soft:
            raise ConfigurationError("soft assertions need --mode maxsmt")
        result = self.solve_formula(script.formula, budget)
        return SolveOutcome(result, script.table, script.expected_status)

    def solve_formula(self, f0: WeightedFormula, budget: Optional[Budget] = None) -> NiaResult:
        budget = budget or self.budget()
        if self.config.mode == Mode.MAXSMT:
            return solve_maxsmt(f0, self.config, budget)
        if self.config.strategy == Strategy.CORES:
            return solve_smt_cores(f0, self.config, budget)
        return solve_smt_min_models(f0, self.config, budget)

    def oracle_text(self, text: str, box: Tuple[int, int]) -> SolveOutcome:
        """Brute force the script over ``box``; no model in the box prints as unknown."""
        script = parse_script(text)
        found: OracleResult = brute_force_nia(script.formula, box)
        stats = SolverStats()
        if not found.found:
            return SolveOutcome(NiaResult(Status.UNKNOWN, stats=stats), script.table, script.expected_status)
        objective = found.cost[1] if self.config.mode == Mode.MAXSMT else None
        result = NiaResult(Status.SAT, model=found.model, objective=objective, stats=stats)
        return SolveOutcome(result, script.table, script.expected_status, optimizing=objective is not None)
