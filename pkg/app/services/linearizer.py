"""
Linearization of polynomial constraints by case splitting.

Every non-linear monomial Q gets a fresh variable v_Q and one split
variable V drawn from the chosen set. For each integer k in the artificial
domain of V the clause ``V = k => v_Q = Q[V := k]`` is added, written as
``V <= k-1 or V >= k+1 or v_Q - Q[V := k] = 0``. Residues that are still
non-linear are abstracted the same way.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from app.models.base import OriginKind, VarOrigin, VarSort, VarTable
from app.models.formula import (
    Atom,
    Clause,
    Literal,
    Relation,
    WeightedFormula,
    make_atom,
    make_clause,
)
from app.models.polynomial import Monomial, Polynomial, eval_monomial_at
from app.services.lia_engine import LiaFormula
from app.utils.exceptions import ContractViolation, LinearizationError

logger = logging.getLogger(__name__)


class BoundKind(enum.Enum):
    LOWER = 'lower'
    UPPER = 'upper'


@dataclass(frozen=True)
class ArtificialBound:
    var: int
    kind: BoundKind
    value: int
    soft_weight: Fraction = Fraction(1)
    generation: int = 0

    @property
    def key(self) -> Tuple[int, BoundKind]:
        return (self.var, self.kind)

    def literal(self, table: VarTable) -> Literal:
        x = Polynomial.var(self.var)
        if self.kind == BoundKind.UPPER:
            return Literal.of(make_atom(x - self.value, Relation.LE, table))
        return Literal.of(make_atom(Polynomial.constant(self.value) - x, Relation.LE, table))

    def negation(self, table: VarTable) -> Literal:
        """``V >= U+1`` for an upper bound, ``V <= L-1`` for a lower one."""
        x = Polynomial.var(self.var)
        if self.kind == BoundKind.UPPER:
            return Literal.of(make_atom(Polynomial.constant(self.value + 1) - x, Relation.LE, table))
        return Literal.of(make_atom(x - (self.value - 1), Relation.LE, table))

    def violated_by(self, model: Mapping[int, Fraction]) -> bool:
        value = model[self.var]
        if self.kind == BoundKind.UPPER:
            return value > self.value
        return value < self.value

    def distance(self, model: Mapping[int, Fraction]) -> Fraction:
        value = model[self.var]
        if self.kind == BoundKind.UPPER:
            return max(Fraction(0), value - self.value)
        return max(Fraction(0), self.value - value)

    def to_str(self, table: VarTable) -> str:
        op = '<=' if self.kind == BoundKind.UPPER else '>='
        return f"{table.name(self.var)} {op} {self.value}"


class BoundSet:
    """Artificial bounds keyed by (var, kind), in split-variable order."""

    def __init__(self, bounds: Iterable[ArtificialBound] = ()):
        self._bounds: Dict[Tuple[int, BoundKind], ArtificialBound] = {}
        for b in bounds:
            self._bounds[b.key] = b

    def __iter__(self) -> Iterator[ArtificialBound]:
        return iter(self._bounds.values())

    def __len__(self) -> int:
        return len(self._bounds)

    def __contains__(self, bound: object) -> bool:
        return isinstance(bound, ArtificialBound) and self._bounds.get(bound.key) == bound

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundSet):
            return NotImplemented
        return self._bounds == other._bounds

    def get(self, var: int, kind: BoundKind) -> Optional[ArtificialBound]:
        return self._bounds.get((var, kind))

    @property
    def variables(self) -> List[int]:
        seen: List[int] = []
        for var, _ in self._bounds:
            if var not in seen:
                seen.append(var)
        return seen

    def domain(self, var: int) -> Tuple[int, int]:
        low = self._bounds.get((var, BoundKind.LOWER))
        up = self._bounds.get((var, BoundKind.UPPER))
        if low is None or up is None:
            raise ContractViolation(f"v{var} has no artificial domain")
        return low.value, up.value

    def replace(self, bounds: Iterable[ArtificialBound]) -> "BoundSet":
        merged = BoundSet(self)
        for b in bounds:
            merged._bounds[b.key] = b
        return merged

    def violated(self, model: Mapping[int, Fraction]) -> List[ArtificialBound]:
        return [b for b in self if b.violated_by(model)]

    def snapshot(self) -> Tuple[Tuple[int, str, int], ...]:
        return tuple(sorted((b.var, b.kind.value, b.value) for b in self))

    def domains(self, table: VarTable) -> Dict[str, Tuple[int, int]]:
        return {table.name(v): self.domain(v) for v in self.variables}


@dataclass
class RelaxPolicy:
    """Parameters of the relaxation rules."""

    alpha: Fraction = Fraction(2)
    beta: Fraction = Fraction(10)
    correction: bool = True
    occurrences: Dict[int, int] = field(default_factory=dict)
    true_bounds: Dict[Tuple[int, BoundKind], int] = field(default_factory=dict)

    def step(self, bound: ArtificialBound) -> int:
        n = bound.generation
        m = max(1, self.occurrences.get(bound.var, 1))
        return math.ceil(self.alpha * min(self.beta, Fraction(n, m)))


@dataclass
class LinearizationState:
    """Bookkeeping of one linearization, owned by a driver loop."""

    table: VarTable
    bounds: BoundSet
    base: Dict[int, Clause] = field(default_factory=dict)
    soft: Dict[int, Clause] = field(default_factory=dict)
    monomial_var: Dict[Monomial, int] = field(default_factory=dict)
    lin_var: Dict[Monomial, int] = field(default_factory=dict)
    case_clauses: Dict[Tuple[Monomial, int], int] = field(default_factory=dict)
    clauses: Dict[int, Clause] = field(default_factory=dict)
    blocking_clauses: List[int] = field(default_factory=list)
    ood_clauses: Dict[Tuple[Monomial, str, int], int] = field(default_factory=dict)
    occurrences: Dict[int, int] = field(default_factory=dict)
    true_bounds: Dict[Tuple[int, BoundKind], int] = field(default_factory=dict)
    next_id: int = 0

    @property
    def split_vars(self) -> List[int]:
        return self.bounds.variables

    def new_id(self) -> int:
        cid = self.next_id
        self.next_id += 1
        return cid

    def formula(self) -> LiaFormula:
        merged = dict(self.base)
        merged.update(self.clauses)
        return LiaFormula(self.table, merged)

    def monomial_vars(self) -> List[int]:
        return list(self.monomial_var.values())

    def extend_model(self, values: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        """Give every v_Q the value of its monomial."""
        out = dict(values)
        for mono, var in self.monomial_var.items():
            out[var] = mono.evaluate(out)
        return out

    # -- abstraction ---------------------------------------------------

    def abstract_poly(self, poly: Polynomial) -> Polynomial:
        terms: Dict[Monomial, Fraction] = {}
        for mono, coeff in poly.terms.items():
            if mono.degree <= 1:
                terms[mono] = terms.get(mono, Fraction(0)) + coeff
            else:
                var = self._monomial_variable(mono)
                key = Monomial(((var, 1),))
                terms[key] = terms.get(key, Fraction(0)) + coeff
        return Polynomial(terms)

    def abstract_atom(self, atom: Atom) -> Atom:
        if atom.poly.is_linear:
            return atom
        return make_atom(self.abstract_poly(atom.poly), atom.rel, self.table)

    def abstract_clause(self, clause: Clause) -> Clause:
        return make_clause(
            Literal.of(self.abstract_atom(lit.atom)) if lit.atom is not None else lit for lit in clause
        )

    def _monomial_variable(self, mono: Monomial) -> int:
        var = self.monomial_var.get(mono)
        if var is not None:
            return var
        split = next((v for v in self.split_vars if mono.exponent(v) > 0), None)
        if split is None:
            raise LinearizationError(
                f"monomial {mono.to_str(self.table.name)} has no split variable"
            )
        sort = VarSort.INT if all(self.table.is_int(v) for v in mono.variables) else VarSort.REAL
        name = "v_" + mono.to_str(self.table.name).replace('*', '').replace('^', '')
        var = self.table.add(name, sort, VarOrigin(OriginKind.MONOMIAL, monomial=mono))
        self.monomial_var[mono] = var
        self.lin_var[mono] = split
        return var

    # -- case splitting ------------------------------------------------

    def case_clause(self, mono: Monomial, k: int) -> Clause:
        v = self.lin_var[mono]
        x = Polynomial.var(v)
        rhs = self.abstract_poly(eval_monomial_at(mono, v, k))
        return make_clause([
            Literal.of(make_atom(x - (k - 1), Relation.LE, self.table)),
            Literal.of(make_atom(Polynomial.constant(k + 1) - x, Relation.LE, self.table)),
            Literal.of(make_atom(Polynomial.var(self.monomial_var[mono]) - rhs, Relation.EQ, self.table)),
        ])

    def ensure_cases(self) -> List[int]:
        """Add missing case clauses for every monomial over its current domain."""
        added: List[int] = []
        done: Set[Monomial] = set()
        while True:
            pending = [m for m in self.monomial_var if m not in done]
            if not pending:
                return added
            for mono in pending:
                done.add(mono)
                low, up = self.bounds.domain(self.lin_var[mono])
                for k in range(low, up + 1):
                    if (mono, k) in self.case_clauses:
                        continue
                    cid = self.new_id()
                    self.clauses[cid] = self.case_clause(mono, k)
                    self.case_clauses[(mono, k)] = cid
                    added.append(cid)

    def remove_cases(self, split_vars: Set[int]) -> List[int]:
        removed: List[int] = []
        for (mono, k), cid in list(self.case_clauses.items()):
            if self.lin_var[mono] in split_vars:
                del self.case_clauses[(mono, k)]
                del self.clauses[cid]
                removed.append(cid)
        return removed


# -- analysis of the input ---------------------------------------------


def _nonlinear_monomials(f0: WeightedFormula) -> List[Monomial]:
    seen: Dict[Monomial, None] = {}
    for poly in f0.polynomials():
        for mono in sorted(poly.terms):
            if mono.degree > 1:
                seen.setdefault(mono, None)
    return list(seen)


def _uncovered(mono: Monomial, chosen: Sequence[int]) -> Optional[Monomial]:
    while mono.degree > 1:
        split = next((v for v in chosen if mono.exponent(v) > 0), None)
        if split is None:
            return mono
        mono = mono.without(split)
    return None


def choose_linearization_variables(f0: WeightedFormula) -> List[int]:
    """
    Greedy cover of the non-linear monomials, residues included.

    Picks the Int variable occurring in most uncovered monomials, lowest id
    on ties. The result is ordered by pick.
    """
    monomials = _nonlinear_monomials(f0)
    chosen: List[int] = []
    while True:
        uncovered = {r for r in (_uncovered(m, chosen) for m in monomials) if r is not None}
        counts: Dict[int, int] = {}
        for mono in uncovered:
            for v in mono.variables:
                if f0.table.is_int(v):
                    counts[v] = counts.get(v, 0) + 1
        if not counts:
            return chosen
        pick = min(counts, key=lambda v: (-counts[v], v))
        chosen.append(pick)


def artificial_bounds(f0: WeightedFormula, chosen: Sequence[int]) -> BoundSet:
    """Domain [-1, 1] for every split variable, declared bounds notwithstanding."""
    bounds: List[ArtificialBound] = []
    for v in chosen:
        bounds.append(ArtificialBound(v, BoundKind.LOWER, -1))
        bounds.append(ArtificialBound(v, BoundKind.UPPER, 1))
    return BoundSet(bounds)


def true_bounds(f0: WeightedFormula) -> Dict[Tuple[int, BoundKind], int]:
    """Tightest bounds stated by hard unit clauses on single Int variables."""
    found: Dict[Tuple[int, BoundKind], int] = {}
    for wc in f0.hard:
        if len(wc.clause) != 1 or wc.clause[0].atom is None:
            continue
        atom = wc.clause[0].atom
        coeffs = atom.poly.linear_coefficients()
        if not atom.poly.is_linear or len(coeffs) != 1:
            continue
        (var, a), = coeffs.items()
        if not f0.table.is_int(var) or atom.rel == Relation.LT:
            continue
        limit = -atom.poly.constant_term / a
        kinds = [BoundKind.UPPER if a > 0 else BoundKind.LOWER]
        if atom.rel == Relation.EQ:
            kinds = [BoundKind.UPPER, BoundKind.LOWER]
        for kind in kinds:
            if kind == BoundKind.UPPER:
                value = math.floor(limit)
                old = found.get((var, kind))
                found[(var, kind)] = value if old is None else min(old, value)
            else:
                value = math.ceil(limit)
                old = found.get((var, kind))
                found[(var, kind)] = value if old is None else max(old, value)
    return found


def occurrence_counts(f0: WeightedFormula) -> Dict[int, int]:
    counts: Dict[int, int] = {}
    for poly in f0.polynomials():
        for mono in poly.terms:
            for v in mono.variables:
                counts[v] = counts.get(v, 0) + 1
    return counts


def linearize(f0: WeightedFormula, bounds: BoundSet) -> Tuple[LiaFormula, LinearizationState]:
    """
    Abstract non-linear monomials and add case clauses for the domains.

    Returns:
        (hard linear formula, state); soft clauses of ``f0`` are abstracted
        into ``state.soft``

    Raises:
        LinearizationError: If a monomial has no split variable
    """
    ids = [wc.id for wc in f0.hard + f0.soft]
    state = LinearizationState(
        table=f0.table.copy(),
        bounds=bounds,
        occurrences=occurrence_counts(f0),
        true_bounds=true_bounds(f0),
        next_id=max(ids, default=-1) + 1,
    )
    for wc in f0.hard:
        state.base[wc.id] = state.abstract_clause(wc.clause)
    for wc in f0.soft:
        state.soft[wc.id] = state.abstract_clause(wc.clause)
    added = state.ensure_cases()
    logger.debug(
        f"linearized {len(state.monomial_var)} monomials with {len(added)} case clauses "
        f"over split variables {[state.table.name(v) for v in state.split_vars]}"
    )
    return state.formula(), state


def update(state: LinearizationState, old_bounds: BoundSet, new_bounds: BoundSet) -> List[int]:
    """
    Widen domains and add the case clauses for the new values.

    Raises:
        ContractViolation: If a bound gets tighter
    """
    for b in old_bounds:
        nb = new_bounds.get(b.var, b.kind)
        if nb is None:
            raise ContractViolation(f"bound on v{b.var} dropped in incremental update")
        if (b.kind == BoundKind.UPPER and nb.value < b.value) or (
            b.kind == BoundKind.LOWER and nb.value > b.value
        ):
            raise ContractViolation(f"bound on {state.table.name(b.var)} tightened in incremental update")
    state.bounds = new_bounds
    return state.ensure_cases()


def relax_domains_cores(
    bounds: BoundSet, core: Iterable[ArtificialBound], policy: RelaxPolicy
) -> BoundSet:
    """
    Weaken every bound of ``bounds`` that appears in ``core``.

    First relaxation jumps to a declared bound when it is weaker, otherwise
    moves by one; later ones move by the correction step (or by one when
    the correction is off).
    """
    hit = [b for b in core if b in bounds]
    if not hit:
        raise ContractViolation("core does not mention any artificial bound")
    relaxed: List[ArtificialBound] = []
    for b in hit:
        sign = 1 if b.kind == BoundKind.UPPER else -1
        declared = policy.true_bounds.get(b.key)
        if b.generation == 0:
            if declared is not None and sign * (declared - b.value) > 0:
                value = declared
            else:
                value = b.value + sign
        elif policy.correction:
            value = b.value + sign * policy.step(b)
        else:
            value = b.value + sign
        relaxed.append(ArtificialBound(b.var, b.kind, value, b.soft_weight, b.generation + 1))
    return bounds.replace(relaxed)


def relax_domains_min_models(
    bounds: BoundSet, model: Mapping[int, Fraction], policy: RelaxPolicy
) -> BoundSet:
    """Move every violated bound to the model value, widened by the correction step."""
    violated = bounds.violated(model)
    if not violated:
        raise ContractViolation("model violates no artificial bound")
    relaxed: List[ArtificialBound] = []
    for b in violated:
        sign = 1 if b.kind == BoundKind.UPPER else -1
        value = int(model[b.var])
        declared = policy.true_bounds.get(b.key)
        if b.generation == 0:
            if declared is not None and sign * (declared - value) >= 0:
                value = declared
        elif policy.correction:
            value += sign * policy.step(b)
        relaxed.append(ArtificialBound(b.var, b.kind, value, b.soft_weight, b.generation + 1))
    return bounds.replace(relaxed)


def relax_domains_non_inc(bounds: BoundSet, model: Mapping[int, Fraction], radius: int) -> BoundSet:
    """Recenter the domain of every variable with a violated bound on its model value."""
    violated = bounds.violated(model)
    if not violated:
        raise ContractViolation("model violates no artificial bound")
    relaxed: List[ArtificialBound] = []
    for var in dict.fromkeys(b.var for b in violated):
        center = int(model[var])
        for kind, value in ((BoundKind.LOWER, center - radius), (BoundKind.UPPER, center + radius)):
            old = bounds.get(var, kind)
            relaxed.append(ArtificialBound(var, kind, value, old.soft_weight, old.generation + 1))
    return bounds.replace(relaxed)


@dataclass
class NonIncChange:
    removed: List[int]
    added: List[int]
    blocking_id: int


def update_non_inc(
    state: LinearizationState,
    old_bounds: BoundSet,
    new_bounds: BoundSet,
    blocking: Optional[Iterable[ArtificialBound]] = None,
) -> NonIncChange:
    """
    Replace case clauses of re-centred variables and block the old bounds.

    Args:
        blocking: Bounds forming the blocking clause (an optimality core);
            all of ``old_bounds`` when omitted
    """
    changed = {v for v in new_bounds.variables if old_bounds.domain(v) != new_bounds.domain(v)}
    removed = state.remove_cases(changed)
    state.bounds = new_bounds
    added = state.ensure_cases()
    blocked = list(blocking) if blocking is not None else list(old_bounds)
    clause = make_clause(b.negation(state.table) for b in blocked)
    blocking_id = state.new_id()
    state.clauses[blocking_id] = clause
    state.blocking_clauses.append(blocking_id)
    logger.debug(f"non-incremental update: -{len(removed)} +{len(added)} clauses, blocking size {len(clause)}")
    return NonIncChange(removed, added, blocking_id)


def out_of_domain_clauses(state: LinearizationState) -> List[int]:
    """Lower bounds on squares of values just outside the domain."""
    added: List[int] = []
    for mono, vq in state.monomial_var.items():
        var = mono.pure_square_of()
        if var is None or state.lin_var[mono] != var:
            continue
        low, up = state.bounds.domain(var)
        x = Polynomial.var(var)
        v = Polynomial.var(vq)
        candidates = []
        if low - 1 <= 0:
            candidates.append((
                ('low', low),
                [Polynomial.constant(low) - x, Polynomial.constant((low - 1) ** 2) - v],
            ))
        if up + 1 >= 0:
            candidates.append((
                ('up', up),
                [x - up, Polynomial.constant((up + 1) ** 2) - v],
            ))
        for (side, edge), polys in candidates:
            key = (mono, side, edge)
            if key in state.ood_clauses:
                continue
            cid = state.new_id()
            state.clauses[cid] = make_clause(Literal.of(make_atom(p, Relation.LE, state.table)) for p in polys)
            state.ood_clauses[key] = cid
            added.append(cid)
    return added
