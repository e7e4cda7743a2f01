"""Exists-forall problems and their Motzkin systems."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from app.models.formula import Clause, WeightedFormula
from app.models.polynomial import Polynomial


@dataclass
class EaProblem:
    """
    ``exists x forall y F(x, y)`` with F in clause form.

    ``formula`` holds the clauses over both variable kinds; weights of soft
    clauses are pairs (0, w).
    """

    formula: WeightedFormula
    exist_vars: List[int] = field(default_factory=list)
    univ_vars: List[int] = field(default_factory=list)

    @property
    def table(self):
        return self.formula.table


@dataclass(frozen=True)
class MotzkinRow:
    """``sum(coeffs[y] * y) rel rhs`` with coefficients polynomial in x."""

    coeffs: Tuple[Tuple[int, Polynomial], ...]
    rhs: Polynomial

    def coeff(self, y: int) -> Polynomial:
        for var, p in self.coeffs:
            if var == y:
                return p
        return Polynomial()

    def as_dict(self) -> Dict[int, Polynomial]:
        return dict(self.coeffs)


@dataclass
class MotzkinSystem:
    """
    Negation of a clause: ``A y <= b`` and ``C y < d``.

    ``outside`` keeps the y-free literals that cannot become rows (Boolean
    literals and equalities); the clause holds iff one of them holds or the
    system is infeasible.
    """

    univ_vars: Tuple[int, ...]
    nonstrict: List[MotzkinRow] = field(default_factory=list)
    strict: List[MotzkinRow] = field(default_factory=list)
    outside: Clause = ()

    @property
    def is_empty(self) -> bool:
        return not self.nonstrict and not self.strict


@dataclass(frozen=True)
class Passthrough:
    """A clause with no universal variable, kept verbatim."""

    clause: Clause
