"""Atoms, literals, clauses, weights and models."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from app.models.base import VarSort, VarTable
from app.models.polynomial import Polynomial
from app.utils.exceptions import ContractViolation


Cost = Tuple[Fraction, Fraction]
ZERO_COST: Cost = (Fraction(0), Fraction(0))


class Relation(enum.Enum):
    LE = '<='
    LT = '<'
    EQ = '='


@dataclass(frozen=True)
class Atom:
    """``poly rel 0``. Build through ``make_atom`` to get the normal form."""

    poly: Polynomial
    rel: Relation

    @property
    def is_constant(self) -> bool:
        return self.poly.is_constant

    def holds(self, values: Mapping[int, Fraction]) -> bool:
        return _compare(self.poly.evaluate(values), self.rel)

    def constant_truth(self) -> bool:
        return _compare(self.poly.constant_term, self.rel)

    def to_str(self, table: Optional[VarTable] = None) -> str:
        name = table.name if table is not None else (lambda v: f"v{v}")
        return f"{self.poly.to_str(name)} {self.rel.value} 0"


def _compare(value: Fraction, rel: Relation) -> bool:
    if rel == Relation.LE:
        return value <= 0
    if rel == Relation.LT:
        return value < 0
    return value == 0


def is_integral_poly(poly: Polynomial, table: VarTable) -> bool:
    """True when every variable of ``poly`` is Int-sorted."""
    return all(table.sort(v) == VarSort.INT for v in poly.variables)


def make_atom(poly: Polynomial, rel: Relation, table: VarTable) -> Atom:
    """
    Normalize ``poly rel 0``.

    Over Int-only polynomials denominators are cleared and ``p < 0`` becomes
    ``p + 1 <= 0``. Real atoms are kept as given.
    """
    if is_integral_poly(poly, table):
        lcm = 1
        for c in poly.terms.values():
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        if lcm != 1:
            poly = poly.scale(lcm)
        if rel == Relation.LT:
            poly = poly + 1
            rel = Relation.LE
    return Atom(poly, rel)


def negate_atom(atom: Atom, table: VarTable) -> List[Atom]:
    """Atoms whose disjunction is equivalent to the negation of ``atom``."""
    if atom.rel == Relation.LE:
        return [make_atom(-atom.poly, Relation.LT, table)]
    if atom.rel == Relation.LT:
        return [make_atom(-atom.poly, Relation.LE, table)]
    return [
        make_atom(atom.poly, Relation.LT, table),
        make_atom(-atom.poly, Relation.LT, table),
    ]


def le(lhs: Polynomial, rhs: Polynomial, table: VarTable) -> Atom:
    return make_atom(lhs - rhs, Relation.LE, table)


def lt(lhs: Polynomial, rhs: Polynomial, table: VarTable) -> Atom:
    return make_atom(lhs - rhs, Relation.LT, table)


def ge(lhs: Polynomial, rhs: Polynomial, table: VarTable) -> Atom:
    return make_atom(rhs - lhs, Relation.LE, table)


def gt(lhs: Polynomial, rhs: Polynomial, table: VarTable) -> Atom:
    return make_atom(rhs - lhs, Relation.LT, table)


def eq(lhs: Polynomial, rhs: Polynomial, table: VarTable) -> Atom:
    return make_atom(lhs - rhs, Relation.EQ, table)


@dataclass(frozen=True)
class Literal:
    """
    Either a (positive) theory atom or a signed Boolean variable.

    Negated theory atoms never appear: they are rewritten with
    ``negate_atom`` into positive atoms before reaching a clause.
    """

    atom: Optional[Atom] = None
    var: Optional[int] = None
    positive: bool = True

    @classmethod
    def of(cls, atom: Atom) -> "Literal":
        return cls(atom=atom)

    @classmethod
    def boolean(cls, var: int, positive: bool = True) -> "Literal":
        return cls(var=var, positive=positive)

    @property
    def is_bool(self) -> bool:
        return self.atom is None

    def negate_bool(self) -> "Literal":
        if self.atom is not None:
            raise ContractViolation("theory literals are negated with negate_atom")
        return Literal(var=self.var, positive=not self.positive)

    def holds(self, values: Mapping[int, Fraction]) -> bool:
        if self.atom is not None:
            return self.atom.holds(values)
        try:
            value = values[self.var]
        except KeyError:
            raise ContractViolation(f"no value for v{self.var}") from None
        return (value != 0) == self.positive

    def variables(self) -> Tuple[int, ...]:
        if self.atom is not None:
            return self.atom.poly.variables
        return (self.var,)

    def to_str(self, table: Optional[VarTable] = None) -> str:
        if self.atom is not None:
            return self.atom.to_str(table)
        name = table.name(self.var) if table is not None else f"v{self.var}"
        return name if self.positive else f"not {name}"


Clause = Tuple[Literal, ...]


def make_clause(literals: Iterable[Literal]) -> Clause:
    """Drop duplicates and constant-false atoms; keep input order."""
    seen = set()
    out: List[Literal] = []
    for lit in literals:
        if lit.atom is not None and lit.atom.is_constant and not lit.atom.constant_truth():
            continue
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def clause_is_tautology(clause: Clause) -> bool:
    """Contains a constant-true atom or a complementary Boolean pair."""
    bools = set()
    for lit in clause:
        if lit.atom is not None:
            if lit.atom.is_constant and lit.atom.constant_truth():
                return True
        else:
            if (lit.var, not lit.positive) in bools:
                return True
            bools.add((lit.var, lit.positive))
    return False


def clause_holds(clause: Clause, values: Mapping[int, Fraction]) -> bool:
    return any(lit.holds(values) for lit in clause)


def clause_to_str(clause: Clause, table: Optional[VarTable] = None) -> str:
    if not clause:
        return "false"
    return " or ".join(lit.to_str(table) for lit in clause)


@dataclass(frozen=True)
class Weight:
    """Soft weight pair (bound cost, soft cost); compared lexicographically."""

    bound_cost: Fraction = Fraction(0)
    soft_cost: Fraction = Fraction(0)

    def __post_init__(self):
        if self.bound_cost < 0 or self.soft_cost < 0:
            raise ContractViolation("weights must be non-negative")
        if self.bound_cost == 0 and self.soft_cost == 0:
            raise ContractViolation("a soft weight cannot be (0, 0)")

    @classmethod
    def bound(cls, value: Fraction = Fraction(1)) -> "Weight":
        return cls(Fraction(value), Fraction(0))

    @classmethod
    def soft(cls, value: Fraction) -> "Weight":
        return cls(Fraction(0), Fraction(value))

    def as_pair(self) -> Cost:
        return (self.bound_cost, self.soft_cost)


def add_cost(a: Cost, b: Cost) -> Cost:
    return (a[0] + b[0], a[1] + b[1])


@dataclass(frozen=True)
class WeightedClause:
    clause: Clause
    id: int
    weight: Optional[Weight] = None

    @property
    def is_hard(self) -> bool:
        return self.weight is None


class Model(Mapping[int, Fraction]):
    """Exact assignment; Bool variables hold 0 or 1."""

    def __init__(self, assignment: Optional[Mapping[int, Any]] = None):
        self._values: Dict[int, Fraction] = {
            v: Fraction(x) for v, x in (assignment or {}).items()
        }

    def __getitem__(self, var_id: int) -> Fraction:
        return self._values[var_id]

    def __iter__(self) -> Iterator[int]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def restrict(self, var_ids: Iterable[int]) -> "Model":
        return Model({v: self._values[v] for v in var_ids if v in self._values})

    def extend(self, extra: Mapping[int, Any]) -> "Model":
        values = dict(self._values)
        values.update({v: Fraction(x) for v, x in extra.items()})
        return Model(values)

    def to_dict(self, table: VarTable) -> Dict[str, str]:
        return {table.name(v): str(x) for v, x in sorted(self._values.items())}

    def __repr__(self) -> str:
        body = ", ".join(f"v{v}={x}" for v, x in sorted(self._values.items()))
        return f"Model({body})"


def check_model(clauses: Iterable[WeightedClause], model: Mapping[int, Fraction]) -> Tuple[bool, Cost]:
    """
    Evaluate weighted clauses under a total model.

    Returns:
        (every hard clause holds, component-wise sum of falsified soft weights)
    """
    holds_hard = True
    cost = ZERO_COST
    for wc in clauses:
        if clause_holds(wc.clause, model):
            continue
        if wc.weight is None:
            holds_hard = False
        else:
            cost = add_cost(cost, wc.weight.as_pair())
    return holds_hard, cost


@dataclass
class WeightedFormula:
    """Hard and soft clauses over one variable table, ids dense in input order."""

    table: VarTable = field(default_factory=VarTable)
    hard: List[WeightedClause] = field(default_factory=list)
    soft: List[WeightedClause] = field(default_factory=list)
    _next_id: int = 0

    def add_hard(self, clause: Clause) -> int:
        cid = self._next_id
        self._next_id += 1
        self.hard.append(WeightedClause(clause, cid))
        return cid

    def add_soft(self, clause: Clause, weight: Weight) -> int:
        cid = self._next_id
        self._next_id += 1
        self.soft.append(WeightedClause(clause, cid, weight))
        return cid

    def clauses(self) -> List[WeightedClause]:
        return sorted(self.hard + self.soft, key=lambda wc: wc.id)

    def polynomials(self) -> Iterator[Polynomial]:
        for wc in self.hard + self.soft:
            for lit in wc.clause:
                if lit.atom is not None:
                    yield lit.atom.poly

    def variables(self) -> List[int]:
        seen = set()
        for wc in self.hard + self.soft:
            for lit in wc.clause:
                seen.update(lit.variables())
        return sorted(seen)

    @property
    def is_linear(self) -> bool:
        return all(p.is_linear for p in self.polynomials())

    def check(self, model: Mapping[int, Fraction]) -> Tuple[bool, Cost]:
        return check_model(self.hard + self.soft, model)

    def copy(self) -> "WeightedFormula":
        return WeightedFormula(self.table.copy(), list(self.hard), list(self.soft), self._next_id)


def total_model(model: Mapping[int, Fraction], var_ids: Sequence[int]) -> Model:
    """Fill missing variables with 0 so evaluation is total."""
    values = {v: model.get(v, Fraction(0)) for v in var_ids}
    values.update(model)
    return Model(values)
