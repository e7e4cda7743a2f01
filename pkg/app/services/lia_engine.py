"""
Satisfiability of linear arithmetic clause sets over Int/Real/Bool.

The search assigns literals, keeps the arithmetic part in a ``Tableau`` and
splits on fractional Int variables. Every derived fact carries the set of
input clauses, assumptions and open decisions it depends on; a failed
subtree returns that set, which gives conflict-directed backjumping and,
at the root, the leaves of the refutation (the unsatisfiable core).

The same search also runs branch-and-bound over soft clauses for
``lia_optimize``: a soft clause is either satisfied by one of its literals
or given up, and given-up weight is a lower bound on the cost of the
subtree.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from app.models.base import VarSort, VarTable
from app.models.formula import (
    ZERO_COST,
    Atom,
    Clause,
    Cost,
    Literal,
    Model,
    Relation,
    Weight,
    add_cost,
    clause_holds,
    make_atom,
    negate_atom,
)
from app.models.polynomial import Polynomial
from app.models.results import LiaResult, Status
from app.services.simplex import DeltaRational, Reason, Tableau
from app.utils.budget import Budget
from app.utils.exceptions import BudgetExhausted, ContractViolation

logger = logging.getLogger(__name__)

# reason tags
HARD = 'c'
ASSUME = 'a'
SOFT = 's'
DECIDE = 'd'
INCOMPLETE = ('incomplete',)

_TRUE, _FALSE, _OPEN = 1, 0, -1


@dataclass
class LiaFormula:
    """Linear clauses keyed by caller-chosen ids."""

    table: VarTable
    clauses: Dict[int, Clause] = field(default_factory=dict)

    @classmethod
    def from_clauses(cls, table: VarTable, clauses: Iterable[Tuple[int, Clause]]) -> "LiaFormula":
        return cls(table, dict(clauses))

    def validate(self) -> None:
        for cid, clause in self.clauses.items():
            for lit in clause:
                if lit.atom is not None and not lit.atom.poly.is_linear:
                    raise ContractViolation(f"clause {cid} has a non-linear atom")

    def with_clauses(self, extra: Iterable[Tuple[int, Clause]]) -> "LiaFormula":
        merged = dict(self.clauses)
        merged.update(extra)
        return LiaFormula(self.table, merged)


@dataclass
class SoftClause:
    clause: Clause
    weight: Weight
    id: int
    is_artificial_bound: bool = False


class _Bound:
    """One side of a compiled atom: ``var <= value`` or ``var >= value``."""

    __slots__ = ('var', 'upper', 'value')

    def __init__(self, var: int, upper: bool, value: DeltaRational):
        self.var = var
        self.upper = upper
        self.value = value


class _Compiled:
    __slots__ = ('bounds', 'constant')

    def __init__(self, bounds: Sequence[_Bound] = (), constant: Optional[bool] = None):
        self.bounds = tuple(bounds)
        self.constant = constant


class _Found(Exception):
    """Unwinds the search when a model is found in satisfiability mode."""


class LiaSolver:
    """
    One search over a fixed clause set.

    Single-use: build, call ``solve`` or ``optimize`` once.
    """

    def __init__(
        self,
        formula: LiaFormula,
        budget: Optional[Budget] = None,
        assumptions: Sequence[Literal] = (),
        soft: Sequence[SoftClause] = (),
        seed: int = 0,
    ):
        formula.validate()
        self.table = formula.table
        self.budget = budget or Budget.unlimited()
        self.hard: List[Tuple[Hashable, Clause]] = [((HARD, cid), c) for cid, c in sorted(formula.clauses.items())]
        self.assumptions = list(assumptions)
        self.soft = list(soft)
        self._soft_by_id = {s.id: s for s in self.soft}
        self.tableau = Tableau(self.budget)
        self._compiled: Dict[Atom, _Compiled] = {}
        self._slacks: Dict[Tuple[Tuple[int, Fraction], ...], int] = {}
        self._next_slack = len(self.table)
        self._bools: Dict[int, Tuple[bool, Reason]] = {}
        self._satisfied: Set[Hashable] = set()
        self._violated: Dict[int, Reason] = {}
        self._lb: Cost = ZERO_COST
        self._trail: List[Tuple[str, Hashable]] = []
        self._decisions: List[Hashable] = []
        self._branch_depth = 0
        self._next_decision = 0
        self.int_vars: List[int] = []
        self.nodes = 0
        # optimization state
        self.optimizing = False
        self.best: Optional[Cost] = None
        self.best_model: Optional[Model] = None
        self.msc: Optional[Fraction] = None
        self.msc_strict = False
        self.model: Optional[Model] = None
        # seed 0 keeps input order
        self._rng = random.Random(seed) if seed else None
        self._register_atoms()
        if self._rng is not None:
            self._rng.shuffle(self.int_vars)

    # -- preprocessing -------------------------------------------------

    def _register_atoms(self) -> None:
        literals: List[Literal] = [lit for _, c in self.hard for lit in c]
        literals += [lit for sc in self.soft for lit in sc.clause]
        literals += list(self.assumptions)
        for lit in literals:
            if lit.atom is not None:
                self._compile(lit.atom)
                for neg in negate_atom(lit.atom, self.table):
                    self._compile(neg)
        for var in range(len(self.table)):
            if self.tableau.has_var(var) and self.table.sort(var) == VarSort.INT:
                self.int_vars.append(var)

    def _compile(self, atom: Atom) -> _Compiled:
        cached = self._compiled.get(atom)
        if cached is not None:
            return cached
        poly = atom.poly
        if not poly.is_linear:
            raise ContractViolation(f"non-linear atom {atom.to_str(self.table)}")
        coeffs = poly.linear_coefficients()
        const = poly.constant_term
        if not coeffs:
            compiled = _Compiled(constant=atom.constant_truth())
            self._compiled[atom] = compiled
            return compiled
        ordered = sorted(coeffs.items())
        lead_var, lead = ordered[0]
        for var, _ in ordered:
            self.tableau.add_var(var)
        if len(ordered) == 1:
            target = lead_var
        else:
            form = tuple((v, c / lead) for v, c in ordered)
            target = self._slacks.get(form)
            if target is None:
                target = self._next_slack
                self._next_slack += 1
                self._slacks[form] = target
                self.tableau.add_row(target, dict(form))
        bound = -const / lead
        bounds: List[_Bound] = []
        if atom.rel == Relation.EQ:
            bounds.append(self._make_bound(target, True, bound, False, len(ordered) == 1))
            bounds.append(self._make_bound(target, False, bound, False, len(ordered) == 1))
        else:
            strict = atom.rel == Relation.LT
            upper = lead > 0
            bounds.append(self._make_bound(target, upper, bound, strict, len(ordered) == 1))
        compiled = _Compiled(bounds)
        self._compiled[atom] = compiled
        return compiled

    def _make_bound(self, var: int, upper: bool, value: Fraction, strict: bool, single: bool) -> _Bound:
        if single and var < len(self.table) and self.table.sort(var) == VarSort.INT:
            if upper:
                value = Fraction(math.floor(value) - (1 if strict and value.denominator == 1 else 0))
            else:
                value = Fraction(math.ceil(value) + (1 if strict and value.denominator == 1 else 0))
            return _Bound(var, upper, DeltaRational(value))
        delta = 0
        if strict:
            delta = -1 if upper else 1
        return _Bound(var, upper, DeltaRational(value, delta))

    # -- trail ---------------------------------------------------------

    def _push(self) -> Tuple[int, int]:
        return (len(self._trail), self.tableau.push())

    def _pop(self, mark: Tuple[int, int]) -> None:
        own, tab = mark
        while len(self._trail) > own:
            kind, key = self._trail.pop()
            if kind == 'bool':
                del self._bools[key]
            elif kind == 'sat':
                self._satisfied.discard(key)
            elif kind == 'viol':
                soft = self._soft_by_id[key]
                del self._violated[key]
                self._lb = (self._lb[0] - soft.weight.bound_cost, self._lb[1] - soft.weight.soft_cost)
        self.tableau.pop(tab)

    # -- literal state -------------------------------------------------

    def _status(self, lit: Literal) -> Tuple[int, Reason]:
        if lit.atom is None:
            entry = self._bools.get(lit.var)
            if entry is None:
                return _OPEN, frozenset()
            value, reason = entry
            return (_TRUE if value == lit.positive else _FALSE), reason
        compiled = self._compile(lit.atom)
        if compiled.constant is not None:
            return (_TRUE if compiled.constant else _FALSE), frozenset()
        implied = True
        tab = self.tableau
        for b in compiled.bounds:
            if b.upper:
                low = tab.lower.get(b.var)
                if low is not None and low.value > b.value:
                    return _FALSE, low.reason
                up = tab.upper.get(b.var)
                if up is None or up.value > b.value:
                    implied = False
            else:
                up = tab.upper.get(b.var)
                if up is not None and up.value < b.value:
                    return _FALSE, up.reason
                low = tab.lower.get(b.var)
                if low is None or low.value < b.value:
                    implied = False
        return (_TRUE if implied else _OPEN), frozenset()

    def _assert(self, lit: Literal, reason: Reason) -> Optional[Reason]:
        if lit.atom is None:
            entry = self._bools.get(lit.var)
            if entry is not None:
                if entry[0] == lit.positive:
                    return None
                return reason | entry[1]
            self._bools[lit.var] = (lit.positive, reason)
            self._trail.append(('bool', lit.var))
            return None
        compiled = self._compile(lit.atom)
        if compiled.constant is not None:
            return None if compiled.constant else reason
        for b in compiled.bounds:
            if b.upper:
                conflict = self.tableau.assert_upper(b.var, b.value, reason)
            else:
                conflict = self.tableau.assert_lower(b.var, b.value, reason)
            if conflict is not None:
                return conflict
        return None

    def _negations(self, lit: Literal) -> Optional[Literal]:
        """Single literal equivalent to the negation, if there is one."""
        if lit.atom is None:
            return lit.negate_bool()
        negs = negate_atom(lit.atom, self.table)
        if len(negs) == 1:
            return Literal.of(negs[0])
        return None

    # -- propagation ---------------------------------------------------

    def _mark_satisfied(self, key: Hashable) -> None:
        self._satisfied.add(key)
        self._trail.append(('sat', key))

    def _scan(self, tag: Hashable, clause: Clause) -> Tuple[bool, List[Literal], Set[Hashable]]:
        open_lits: List[Literal] = []
        false_reason: Set[Hashable] = set()
        for lit in clause:
            st, reason = self._status(lit)
            if st == _TRUE:
                return True, [], false_reason
            if st == _FALSE:
                false_reason.update(reason)
            else:
                open_lits.append(lit)
        return False, open_lits, false_reason

    def _propagate(self) -> Optional[Reason]:
        changed = True
        while changed:
            changed = False
            for tag, clause in self.hard:
                if tag in self._satisfied:
                    continue
                sat, open_lits, false_reason = self._scan(tag, clause)
                if sat:
                    self._mark_satisfied(tag)
                    continue
                if not open_lits:
                    return frozenset(false_reason) | {tag}
                if len(open_lits) == 1:
                    conflict = self._assert(open_lits[0], frozenset(false_reason) | {tag})
                    if conflict is not None:
                        return conflict
                    self._mark_satisfied(tag)
                    changed = True
            if self.optimizing:
                for soft in self.soft:
                    if soft.id in self._violated or (SOFT, soft.id) in self._satisfied:
                        continue
                    sat, open_lits, false_reason = self._scan((SOFT, soft.id), soft.clause)
                    if sat:
                        self._mark_satisfied((SOFT, soft.id))
                    elif not open_lits:
                        self._violate(soft, frozenset(false_reason) | {(SOFT, soft.id)})
                        conflict = self._prune()
                        if conflict is not None:
                            return conflict
        return self.tableau.check()

    def _violate(self, soft: SoftClause, reason: Reason) -> None:
        self._violated[soft.id] = reason
        self._lb = add_cost(self._lb, soft.weight.as_pair())
        self._trail.append(('viol', soft.id))

    def _lb_reason(self) -> Reason:
        return frozenset().union(*self._violated.values()) if self._violated else frozenset()

    def _prune(self) -> Optional[Reason]:
        if not self.optimizing:
            return None
        if self.best is not None and self._lb >= self.best:
            return self._lb_reason()
        if self.msc is not None:
            if self._lb[1] > self.msc or (self.msc_strict and self._lb[1] >= self.msc):
                return self._lb_reason()
        return None

    # -- branching -----------------------------------------------------

    def _pick_branch(self):
        if self.optimizing:
            for soft in self.soft:
                if len(soft.clause) != 1 or self._soft_open(soft) is None:
                    continue
                return self._soft_branch(soft)
        best = None
        for tag, clause in self.hard:
            if tag in self._satisfied:
                continue
            sat, open_lits, false_reason = self._scan(tag, clause)
            if sat:
                self._mark_satisfied(tag)
                continue
            if best is None or len(open_lits) < len(best[1]):
                best = (tag, open_lits, false_reason)
                if len(open_lits) == 2:
                    break
        if best is not None:
            tag, open_lits, false_reason = best
            if self._rng is not None:
                open_lits = list(open_lits)
                self._rng.shuffle(open_lits)
            return ('clause', [(lit, None) for lit in open_lits], frozenset(false_reason) | {tag})
        if self.optimizing:
            for soft in self.soft:
                if self._soft_open(soft) is not None:
                    return self._soft_branch(soft)
        return self._integer_branch()

    def _soft_open(self, soft: SoftClause):
        if soft.id in self._violated or (SOFT, soft.id) in self._satisfied:
            return None
        sat, open_lits, false_reason = self._scan((SOFT, soft.id), soft.clause)
        if sat:
            self._mark_satisfied((SOFT, soft.id))
            return None
        return open_lits, false_reason

    def _soft_branch(self, soft: SoftClause):
        open_lits, false_reason = self._soft_open(soft)
        options = [(lit, None) for lit in open_lits]
        options.append((None, soft))
        return ('soft', options, frozenset(false_reason) | {(SOFT, soft.id)})

    def _integer_branch(self):
        for var in self.int_vars:
            value = self.tableau.value(var)
            if value.is_integral:
                continue
            if value.real.denominator != 1:
                floor = math.floor(value.real)
            elif value.delta < 0:
                floor = int(value.real) - 1
            else:
                floor = int(value.real)
            x = Polynomial.var(var)
            down = Literal.of(make_atom(x - floor, Relation.LE, self.table))
            up = Literal.of(make_atom(Polynomial.constant(floor + 1) - x, Relation.LE, self.table))
            return ('int', [(down, None), (up, None)], frozenset())
        return None

    # -- search --------------------------------------------------------

    def _search(self) -> Reason:
        self.nodes += 1
        self.budget.poll()
        if self.optimizing:
            pruned = self._prune()
            if pruned is not None:
                return pruned
        conflict = self._propagate()
        if conflict is not None:
            return conflict
        branch = self._pick_branch()
        if branch is None:
            return self._leaf()
        kind, options, base = branch
        if kind == 'int':
            if self._branch_depth >= self.budget.max_branch_depth:
                return frozenset(self._decisions) | {INCOMPLETE}
            self._branch_depth += 1
        try:
            return self._explore(options, base)
        finally:
            if kind == 'int':
                self._branch_depth -= 1

    def _explore(self, options, base: Reason) -> Reason:
        accumulated: Set[Hashable] = set(base)
        learned: List[Tuple[Literal, Reason]] = []
        for lit, give_up in options:
            decision = (DECIDE, self._next_decision)
            self._next_decision += 1
            mark = self._push()
            conflict = None
            for neg, neg_reason in learned:
                conflict = self._assert(neg, neg_reason)
                if conflict is not None:
                    break
            if conflict is not None:
                self._pop(mark)
                return conflict
            self._decisions.append(decision)
            if give_up is not None:
                self._violate(give_up, frozenset({decision}))
                conflict = self._prune()
            else:
                conflict = self._assert(lit, frozenset({decision}))
            result = conflict if conflict is not None else self._search()
            self._decisions.pop()
            self._pop(mark)
            if decision not in result:
                return result
            rest = result - {decision}
            accumulated.update(rest)
            if lit is not None:
                neg = self._negations(lit)
                if neg is not None:
                    learned.append((neg, rest))
        return frozenset(accumulated)

    def _leaf(self) -> Reason:
        model = self._extract_model()
        if not self.optimizing:
            self.model = model
            raise _Found()
        cost = self._true_cost(model)
        if self.best is None or cost < self.best:
            logger.debug(f"improved cost {cost[0]}/{cost[1]} at node {self.nodes}")
            self.best = cost
            self.best_model = model
        return self._lb_reason()

    def _true_cost(self, model: Model) -> Cost:
        cost = ZERO_COST
        for soft in self.soft:
            if not clause_holds(soft.clause, model):
                cost = add_cost(cost, soft.weight.as_pair())
        return cost

    def _extract_model(self) -> Model:
        d = self.tableau.materialize_delta()
        values: Dict[int, Fraction] = {}
        for info in self.table:
            if info.sort == VarSort.BOOL:
                entry = self._bools.get(info.id)
                values[info.id] = Fraction(1 if entry is not None and entry[0] else 0)
            else:
                values[info.id] = self.tableau.value(info.id).materialize(d)
        model = Model(values)
        for tag, clause in self.hard:
            if not clause_holds(clause, model):
                raise ContractViolation(f"model violates clause {tag[1]}")
        for lit in self.assumptions:
            if not lit.holds(model):
                raise ContractViolation("model violates an assumption")
        return model

    def _root(self) -> Reason:
        conflict = self._propagate()
        if conflict is not None:
            return conflict
        for idx, lit in enumerate(self.assumptions):
            conflict = self._assert(lit, frozenset({(ASSUME, idx)}))
            if conflict is not None:
                return conflict
        return self._search()

    # -- entry points --------------------------------------------------

    def solve(self) -> LiaResult:
        try:
            reason = self._root()
        except _Found:
            return LiaResult(Status.SAT, model=self.model)
        except BudgetExhausted as e:
            logger.warning(f"LIA search stopped: {e}")
            return LiaResult(Status.UNKNOWN, reason=str(e))
        if INCOMPLETE in reason:
            return LiaResult(Status.UNKNOWN, reason='branch depth budget exhausted')
        core, assumed, _ = split_reason(reason)
        return LiaResult(Status.UNSAT, core=core, assumption_core=assumed)

    def optimize(self, msc: Optional[Fraction] = None, msc_strict: bool = False) -> Tuple[Reason, bool]:
        """
        Run branch-and-bound over the soft clauses.

        Returns:
            (final refutation reason, completed) where ``completed`` is False
            on budget exhaustion or incomplete integer search
        """
        self.optimizing = True
        self.msc = msc
        self.msc_strict = msc_strict
        try:
            reason = self._root()
        except BudgetExhausted as e:
            logger.warning(f"optimization stopped: {e}")
            return frozenset(), False
        return reason, INCOMPLETE not in reason


def split_reason(reason: Iterable[Hashable]) -> Tuple[FrozenSet[int], FrozenSet[int], FrozenSet[int]]:
    """Separate clause ids, assumption indices and soft ids."""
    core, assumed, soft = set(), set(), set()
    for tag in reason:
        if not isinstance(tag, tuple) or len(tag) != 2:
            continue
        kind, key = tag
        if kind == HARD:
            core.add(key)
        elif kind == ASSUME:
            assumed.add(key)
        elif kind == SOFT:
            soft.add(key)
    return frozenset(core), frozenset(assumed), frozenset(soft)


def lia_solve(formula: LiaFormula, budget: Optional[Budget] = None, seed: int = 0) -> LiaResult:
    """
    Decide a linear clause set.

    Args:
        formula: Clauses with linear atoms only
        budget: Optional resource limits
        seed: Branching order seed, 0 for input order

    Returns:
        Sat with an exact model, Unsat with a core of clause ids, or Unknown

    Raises:
        ContractViolation: On a non-linear atom
    """
    return LiaSolver(formula, budget, seed=seed).solve()


def lia_solve_assuming(
    formula: LiaFormula,
    assumptions: Sequence[Literal],
    budget: Optional[Budget] = None,
    seed: int = 0,
) -> LiaResult:
    """As ``lia_solve``; Unsat results also cite assumption indices."""
    return LiaSolver(formula, budget, assumptions=assumptions, seed=seed).solve()
