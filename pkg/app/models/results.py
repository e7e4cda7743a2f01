"""Result objects returned by the engines."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from app.models.base import VarTable
from app.models.formula import Cost, Model


class Status(enum.Enum):
    SAT = 'sat'
    UNSAT = 'unsat'
    UNKNOWN = 'unknown'
    OPTIMAL = 'optimal'

    @property
    def exit_code(self) -> int:
        return {Status.SAT: 0, Status.OPTIMAL: 0, Status.UNSAT: 1, Status.UNKNOWN: 2}[self]

    @property
    def smtlib(self) -> str:
        return 'sat' if self in (Status.SAT, Status.OPTIMAL) else self.value


@dataclass
class LiaResult:
    """Sat(model) | Unsat(core, cited assumptions) | Unknown."""

    status: Status
    model: Optional[Model] = None
    core: FrozenSet[int] = frozenset()
    assumption_core: FrozenSet[int] = frozenset()
    reason: str = ''

    @property
    def is_sat(self) -> bool:
        return self.status == Status.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == Status.UNSAT

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': self.status.value,
            'core': sorted(self.core),
            'assumption_core': sorted(self.assumption_core),
            'reason': self.reason,
        }


@dataclass(frozen=True)
class OptimalityCore:
    hard_ids: FrozenSet[int] = frozenset()
    soft_ids: FrozenSet[int] = frozenset()
    fallback: bool = False


@dataclass
class OptResult:
    """Optimal(model, cost, opt_core) | Unsat | Unknown."""

    status: Status
    model: Optional[Model] = None
    cost: Optional[Cost] = None
    opt_core: Optional[OptimalityCore] = None
    best_so_far: Optional[Model] = None
    best_cost: Optional[Cost] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == Status.OPTIMAL

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': self.status.value,
            'cost': [str(c) for c in self.cost] if self.cost else None,
        }


@dataclass
class IterationRecord:
    """One outer-loop iteration of the non-linear driver."""

    index: int
    outcome: str
    bound_cost: Optional[Fraction] = None
    soft_cost: Optional[Fraction] = None
    domains: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    blocking_size: Optional[int] = None
    clauses_added: int = 0
    clauses_removed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'outcome': self.outcome,
            'bound_cost': str(self.bound_cost) if self.bound_cost is not None else None,
            'soft_cost': str(self.soft_cost) if self.soft_cost is not None else None,
            'domains': {k: list(v) for k, v in self.domains.items()},
            'blocking_size': self.blocking_size,
            'clauses_added': self.clauses_added,
            'clauses_removed': self.clauses_removed,
        }


@dataclass
class SolverStats:
    iterations: int = 0
    case_clauses_added: int = 0
    case_clauses_removed: int = 0
    optimizer_calls: int = 0
    lia_calls: int = 0
    wall_time: float = 0.0
    history: List[IterationRecord] = field(default_factory=list)
    bound_sets: List[Tuple[Tuple[int, str, int], ...]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iterations': self.iterations,
            'case_clauses_added': self.case_clauses_added,
            'case_clauses_removed': self.case_clauses_removed,
            'optimizer_calls': self.optimizer_calls,
            'lia_calls': self.lia_calls,
            'wall_time': round(self.wall_time, 4),
        }


@dataclass
class NiaResult:
    status: Status
    model: Optional[Model] = None
    objective: Optional[Fraction] = None
    best_so_far: Optional[Model] = None
    certificate: Optional[Model] = None
    stats: SolverStats = field(default_factory=SolverStats)
    # set when the model or certificate uses variables beyond the parsed table
    table: Optional[VarTable] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': self.status.value,
            'objective': str(self.objective) if self.objective is not None else None,
            'stats': self.stats.to_dict(),
        }
