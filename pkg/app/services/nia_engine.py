"""
Outer loops for non-linear integer arithmetic.

Each driver linearizes the input over small artificial domains, asks a
linear engine for a model, a core or an optimum, and widens the domains
until the linear answer carries over to the original formula.
"""
from __future__ import annotations

import logging
import time
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.models.base import OriginKind, VarOrigin, VarSort
from app.models.formula import (
    Clause,
    Literal,
    Model,
    Relation,
    Weight,
    WeightedFormula,
    make_atom,
    make_clause,
    total_model,
)
from app.models.polynomial import Polynomial
from app.models.results import IterationRecord, NiaResult, SolverStats, Status
from app.services.lia_engine import SoftClause, lia_solve_assuming
from app.services.lia_optimize import MaxSmtInstance, maxsmt_solve, omt_solve
from app.services.linearizer import (
    ArtificialBound,
    BoundKind,
    BoundSet,
    RelaxPolicy,
    artificial_bounds,
    choose_linearization_variables,
    linearize,
    out_of_domain_clauses,
    relax_domains_cores,
    relax_domains_min_models,
    relax_domains_non_inc,
    update,
    update_non_inc,
)
from app.utils.budget import Budget
from app.utils.exceptions import ConfigurationError, ContractViolation
from config.settings import SolverConfig, Strategy

logger = logging.getLogger(__name__)

MIN_MODEL_STRATEGIES = (Strategy.MAXSMT, Strategy.OMT, Strategy.JUMP, Strategy.JUMP_CORES)
MAXSMT_STRATEGIES = (Strategy.MAXSMT, Strategy.JUMP, Strategy.JUMP_CORES)


class _Run:
    """State shared by the drivers: linearization, policy, stats and clock."""

    def __init__(self, f0: WeightedFormula, cfg: SolverConfig, budget: Optional[Budget]):
        self.f0 = f0
        self.cfg = cfg
        self.budget = budget or Budget.unlimited()
        self.stats = SolverStats()
        self.started = time.perf_counter()
        chosen = choose_linearization_variables(f0)
        _, self.state = linearize(f0, artificial_bounds(f0, chosen))
        self.stats.case_clauses_added += len(self.state.case_clauses)
        self.policy = RelaxPolicy(
            alpha=Fraction(str(cfg.alpha)),
            beta=Fraction(str(cfg.beta)),
            correction=cfg.correction,
            occurrences=self.state.occurrences,
            true_bounds=self.state.true_bounds,
        )
        self._bound_ids: Dict[Tuple[int, BoundKind], int] = {}
        self.omt_vars = None
        if cfg.use_ood_clauses:
            out_of_domain_clauses(self.state)
        logger.info(
            f"linearization over {[self.state.table.name(v) for v in self.state.split_vars]}, "
            f"{len(self.state.monomial_var)} monomials, strategy {cfg.strategy.value}"
        )

    @property
    def bounds(self) -> BoundSet:
        return self.state.bounds

    def bound_softs(self) -> Tuple[List[SoftClause], Dict[int, ArtificialBound]]:
        softs: List[SoftClause] = []
        by_id: Dict[int, ArtificialBound] = {}
        for b in self.bounds:
            sid = self._bound_ids.get(b.key)
            if sid is None:
                sid = self._bound_ids[b.key] = self.state.new_id()
            softs.append(SoftClause((b.literal(self.state.table),), Weight.bound(b.soft_weight), sid, True))
            by_id[sid] = b
        return softs, by_id

    def begin_iteration(self) -> bool:
        """Count an iteration; False once the deadline has passed."""
        if self.budget.expired():
            return False
        self.stats.iterations += 1
        self.stats.bound_sets.append(self.bounds.snapshot())
        return True

    def record(self, outcome: str, **fields) -> IterationRecord:
        rec = IterationRecord(
            index=self.stats.iterations,
            outcome=outcome,
            domains=self.bounds.domains(self.state.table),
            **fields,
        )
        self.stats.history.append(rec)
        logger.info(
            f"iteration {rec.index}: {outcome}"
            + (f", cost {rec.bound_cost}/{rec.soft_cost}" if rec.bound_cost is not None else "")
        )
        return rec

    def widen(self, new_bounds: BoundSet) -> int:
        added = update(self.state, self.bounds, new_bounds)
        self.stats.case_clauses_added += len(added)
        if self.cfg.use_ood_clauses:
            out_of_domain_clauses(self.state)
        return len(added)

    def jump(self, model: Model, blocking: Optional[List[ArtificialBound]]) -> Tuple[int, int, int]:
        old = self.bounds
        new = relax_domains_non_inc(old, model, self.cfg.radius)
        change = update_non_inc(self.state, old, new, blocking)
        self.stats.case_clauses_added += len(change.added)
        self.stats.case_clauses_removed += len(change.removed)
        if self.cfg.use_ood_clauses:
            out_of_domain_clauses(self.state)
        return len(change.added), len(change.removed), len(self.state.clauses[change.blocking_id])

    def verified(self, model: Model) -> Model:
        """Project onto the input variables and re-check the input hard clauses."""
        values = total_model(model, range(len(self.f0.table)))
        projected = values.restrict(range(len(self.f0.table)))
        holds, _ = self.f0.check(projected)
        if not holds:
            logger.error("linear model does not satisfy the input constraints")
            raise ContractViolation("model fails the input hard clauses")
        return projected

    def finish(self, status: Status, **fields) -> NiaResult:
        self.stats.wall_time = time.perf_counter() - self.started
        logger.info(f"{status.value} after {self.stats.iterations} iterations in {self.stats.wall_time:.3f}s")
        return NiaResult(status, stats=self.stats, **fields)


def _check_cost_zero(run: _Run, model: Model) -> None:
    if run.bounds.violated(model):
        raise ContractViolation("optimizer reported bound cost 0 with a violated bound")


def solve_smt_cores(f0: WeightedFormula, cfg: SolverConfig, budget: Optional[Budget] = None) -> NiaResult:
    """
    Decide ``f0`` by relaxing the artificial bounds named in unsat cores.

    Args:
        f0: Hard clauses (soft clauses are ignored)
        cfg: Solver options; strategy must be ``cores``
        budget: Shared resource limits

    Returns:
        NiaResult with a verified model on Sat
    """
    if cfg.strategy != Strategy.CORES:
        raise ConfigurationError(f"strategy {cfg.strategy.value} is not core-guided")
    run = _Run(f0, cfg, budget)
    while run.begin_iteration():
        bounds = list(run.bounds)
        assumptions = [b.literal(run.state.table) for b in bounds]
        result = lia_solve_assuming(run.state.formula(), assumptions, run.budget, seed=cfg.seed)
        run.stats.lia_calls += 1
        if result.status == Status.UNKNOWN:
            run.record('unknown')
            return run.finish(Status.UNKNOWN)
        if result.is_sat:
            run.record('sat')
            return run.finish(Status.SAT, model=run.verified(result.model))
        core = [bounds[i] for i in sorted(result.assumption_core)]
        if not core:
            run.record('unsat')
            return run.finish(Status.UNSAT)
        added = run.widen(relax_domains_cores(run.bounds, core, run.policy))
        run.record('relaxed', clauses_added=added)
    return run.finish(Status.UNKNOWN)


def _omt_encoding(run: _Run) -> Tuple[int, List[Tuple[int, Clause]]]:
    """Slack variables l_V, u_V and the cost variable, created once per run."""
    state = run.state
    table = state.table
    if run.omt_vars is None:
        slacks = {}
        for v in state.split_vars:
            lo = table.add(f"l_{table.name(v)}", VarSort.INT, VarOrigin(OriginKind.LOWER_SLACK, of=v))
            up = table.add(f"u_{table.name(v)}", VarSort.INT, VarOrigin(OriginKind.UPPER_SLACK, of=v))
            slacks[v] = (lo, up, [state.new_id() for _ in range(4)])
        cost = table.add("cost", VarSort.INT, VarOrigin(OriginKind.COST_TOTAL))
        run.omt_vars = (slacks, cost, state.new_id())
    slacks, cost, cost_id = run.omt_vars
    a = run.cfg.omt_lower_coeff
    b = run.cfg.omt_upper_coeff
    clauses: List[Tuple[int, Clause]] = []
    total = Polynomial()
    for v, (lo, up, ids) in slacks.items():
        low, high = state.bounds.domain(v)
        x, l_v, u_v = Polynomial.var(v), Polynomial.var(lo), Polynomial.var(up)
        polys = [-l_v, Polynomial.constant(low) - x - l_v, -u_v, x - high - u_v]
        for cid, p in zip(ids, polys):
            clauses.append((cid, make_clause([Literal.of(make_atom(p, Relation.LE, table))])))
        total = total + l_v.scale(a) + u_v.scale(b)
    clauses.append((cost_id, make_clause([Literal.of(make_atom(Polynomial.var(cost) - total, Relation.EQ, table))])))
    return cost, clauses


def solve_smt_min_models(f0: WeightedFormula, cfg: SolverConfig, budget: Optional[Budget] = None) -> NiaResult:
    """
    Decide ``f0`` by minimizing the violation of the artificial bounds.

    ``maxsmt`` and the jump strategies treat each bound as a soft clause of
    bound cost 1; ``omt`` minimizes the summed distance to the domains.
    Incremental strategies widen the violated bounds, the jump strategies
    re-centre the domains on the model and add a blocking clause.
    """
    if cfg.strategy not in MIN_MODEL_STRATEGIES:
        raise ConfigurationError(f"strategy {cfg.strategy.value} does not use minimal models")
    run = _Run(f0, cfg, budget)
    while run.begin_iteration():
        run.stats.optimizer_calls += 1
        by_id: Dict[int, ArtificialBound] = {}
        if cfg.strategy == Strategy.OMT:
            cost_var, extra = _omt_encoding(run)
            formula = run.state.formula().with_clauses(extra)
            result = omt_solve(formula, cost_var, run.budget, seed=cfg.seed)
        else:
            softs, by_id = run.bound_softs()
            result = maxsmt_solve(MaxSmtInstance(run.state.formula(), softs), run.budget, seed=cfg.seed)
        if result.status == Status.UNKNOWN:
            run.record('unknown')
            return run.finish(Status.UNKNOWN)
        if result.status == Status.UNSAT:
            run.record('unsat')
            return run.finish(Status.UNSAT)
        bound_cost = result.cost[0]
        if bound_cost == 0:
            _check_cost_zero(run, result.model)
            run.record('sat', bound_cost=bound_cost, soft_cost=result.cost[1])
            return run.finish(Status.SAT, model=run.verified(result.model))
        if cfg.strategy.non_incremental:
            blocking = None
            if cfg.strategy == Strategy.JUMP_CORES and not result.opt_core.fallback:
                blocking = [by_id[s] for s in sorted(result.opt_core.soft_ids) if s in by_id] or None
            added, removed, size = run.jump(result.model, blocking)
            run.record('jumped', bound_cost=bound_cost, soft_cost=result.cost[1],
                       blocking_size=size, clauses_added=added, clauses_removed=removed)
        else:
            added = run.widen(relax_domains_min_models(run.bounds, result.model, run.policy))
            run.record('relaxed', bound_cost=bound_cost, soft_cost=result.cost[1], clauses_added=added)
    return run.finish(Status.UNKNOWN)


def solve_maxsmt(f0: WeightedFormula, cfg: SolverConfig, budget: Optional[Budget] = None) -> NiaResult:
    """
    Minimize the weight of falsified soft clauses of ``f0``.

    Keeps the best verified model found so far and forbids any later model
    whose soft cost is not strictly smaller; the first Unsat proves it
    optimal.

    Returns:
        Sat with model and objective, Unsat, or Unknown carrying the best
        model found so far
    """
    if cfg.strategy not in MAXSMT_STRATEGIES:
        raise ConfigurationError(f"strategy {cfg.strategy.value} is not available for max-smt")
    run = _Run(f0, cfg, budget)
    user_soft = [
        SoftClause(run.state.soft[wc.id], wc.weight, wc.id) for wc in f0.soft
    ]
    best: Optional[Model] = None
    msc: Optional[Fraction] = None
    while run.begin_iteration():
        run.stats.optimizer_calls += 1
        softs, by_id = run.bound_softs()
        inst = MaxSmtInstance(run.state.formula(), user_soft + softs, msc=msc, msc_strict=best is not None)
        result = maxsmt_solve(inst, run.budget, seed=cfg.seed)
        if result.status == Status.UNKNOWN:
            run.record('unknown')
            return run.finish(Status.UNKNOWN, best_so_far=best, objective=None)
        if result.status == Status.UNSAT:
            run.record('unsat')
            if best is None:
                return run.finish(Status.UNSAT)
            return run.finish(Status.SAT, model=best, objective=msc)
        bound_cost, soft_cost = result.cost
        if bound_cost == 0:
            _check_cost_zero(run, result.model)
            best = run.verified(result.model)
            _, true_cost = f0.check(best)
            msc = true_cost[1]
            run.record('improved', bound_cost=bound_cost, soft_cost=msc)
            if msc == 0:
                return run.finish(Status.SAT, model=best, objective=msc)
            continue
        if cfg.strategy.non_incremental:
            blocking = None
            if cfg.strategy == Strategy.JUMP_CORES and not result.opt_core.fallback:
                blocking = [by_id[s] for s in sorted(result.opt_core.soft_ids) if s in by_id] or None
            added, removed, size = run.jump(result.model, blocking)
            run.record('jumped', bound_cost=bound_cost, soft_cost=soft_cost,
                       blocking_size=size, clauses_added=added, clauses_removed=removed)
        else:
            added = run.widen(relax_domains_min_models(run.bounds, result.model, run.policy))
            run.record('relaxed', bound_cost=bound_cost, soft_cost=soft_cost, clauses_added=added)
    return run.finish(Status.UNKNOWN, best_so_far=best)
