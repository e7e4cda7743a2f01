"""Max-SMT and OMT over linear clause sets."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from app.models.formula import Literal, Relation, make_atom
from app.models.polynomial import Polynomial
from app.models.results import OptimalityCore, OptResult, Status
from app.services.lia_engine import LiaFormula, LiaSolver, SoftClause, lia_solve_assuming, split_reason
from app.utils.budget import Budget
from app.utils.exceptions import ContractViolation

logger = logging.getLogger(__name__)

MAX_OMT_ROUNDS = 10000


@dataclass
class MaxSmtInstance:
    """
    Hard linear clauses plus weighted soft clauses.

    ``msc`` caps the soft component of the cost (None means no cap); with
    ``msc_strict`` the cap is exclusive.
    """

    hard: LiaFormula
    soft: List[SoftClause] = field(default_factory=list)
    msc: Optional[Fraction] = None
    msc_strict: bool = False

    def __post_init__(self):
        if self.msc is not None and self.msc < 0:
            raise ContractViolation("msc must be non-negative")


def maxsmt_solve(inst: MaxSmtInstance, budget: Optional[Budget] = None, seed: int = 0) -> OptResult:
    """
    Minimize the lexicographic (bound, soft) cost of falsified soft clauses.

    Args:
        inst: Instance with optional soft-cost threshold
        budget: Resource limits shared with the caller
        seed: Branching order seed

    Returns:
        Optimal with model, cost and optimality core; Unsat when no hard
        model respects the threshold; Unknown on budget exhaustion
    """
    solver = LiaSolver(inst.hard, budget, soft=inst.soft, seed=seed)
    reason, completed = solver.optimize(inst.msc, inst.msc_strict)
    if not completed:
        return OptResult(Status.UNKNOWN, best_so_far=solver.best_model, best_cost=solver.best)
    if solver.best is None:
        return OptResult(Status.UNSAT)

    hard_ids, _, soft_ids = split_reason(reason)
    core = OptimalityCore(hard_ids, soft_ids)
    if solver.best != (0, 0) and not soft_ids:
        logger.debug("empty soft part in optimality core, using all clauses")
        core = OptimalityCore(
            frozenset(inst.hard.clauses), frozenset(s.id for s in inst.soft), fallback=True
        )
    logger.debug(
        f"max-smt optimum {solver.best[0]}/{solver.best[1]} after {solver.nodes} nodes, "
        f"core {len(core.hard_ids)} hard + {len(core.soft_ids)} soft"
    )
    return OptResult(Status.OPTIMAL, model=solver.best_model, cost=solver.best, opt_core=core)


def omt_solve(
    formula: LiaFormula, cost_var: int, budget: Optional[Budget] = None, seed: int = 0
) -> OptResult:
    """
    Minimize an Int cost variable by repeated tightening.

    Each model with cost c is followed by a call requiring cost <= c - 1;
    the first Unsat proves the last model optimal.
    """
    if not formula.table.is_int(cost_var):
        raise ContractViolation("cost variable must be Int")
    cost = Polynomial.var(cost_var)
    best_model = None
    best_value: Optional[Fraction] = None
    assumptions: List[Literal] = []
    for _ in range(MAX_OMT_ROUNDS):
        result = lia_solve_assuming(formula, assumptions, budget, seed=seed)
        if result.status == Status.UNKNOWN:
            best_cost = (best_value, Fraction(0)) if best_value is not None else None
            return OptResult(Status.UNKNOWN, best_so_far=best_model, best_cost=best_cost)
        if result.is_unsat:
            if best_model is None:
                return OptResult(Status.UNSAT)
            return OptResult(Status.OPTIMAL, model=best_model, cost=(best_value, Fraction(0)))
        best_model = result.model
        best_value = result.model[cost_var]
        logger.debug(f"omt: cost {best_value}")
        bound = make_atom(cost - (best_value - 1), Relation.LE, formula.table)
        assumptions = [Literal.of(bound)]
    raise ContractViolation("cost variable appears to be unbounded below")
