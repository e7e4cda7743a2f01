"""
General-form simplex over exact delta-rationals.

Rows express basic variables in terms of non-basic ones. Bounds carry the
reason set that justified them so that infeasibility explanations can be
turned into cores. Bland's rule (smallest index) picks both the violated
basic variable and the entering variable, which guarantees termination.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, List, Mapping, Optional, Set, Tuple

from app.utils.budget import Budget

logger = logging.getLogger(__name__)

Reason = FrozenSet[Hashable]


class DeltaRational:
    """``real + delta * d`` for a positive infinitesimal d."""

    __slots__ = ('real', 'delta')

    def __init__(self, real, delta=0):
        self.real = Fraction(real)
        self.delta = Fraction(delta)

    def _key(self) -> Tuple[Fraction, Fraction]:
        return (self.real, self.delta)

    def __lt__(self, other: "DeltaRational") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "DeltaRational") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "DeltaRational") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "DeltaRational") -> bool:
        return self._key() >= other._key()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeltaRational):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __add__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.real + other.real, self.delta + other.delta)

    def __sub__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.real - other.real, self.delta - other.delta)

    def __mul__(self, factor: Fraction) -> "DeltaRational":
        return DeltaRational(self.real * factor, self.delta * factor)

    __rmul__ = __mul__

    def __truediv__(self, factor: Fraction) -> "DeltaRational":
        return DeltaRational(self.real / factor, self.delta / factor)

    def __neg__(self) -> "DeltaRational":
        return DeltaRational(-self.real, -self.delta)

    @property
    def is_integral(self) -> bool:
        return self.delta == 0 and self.real.denominator == 1

    def materialize(self, d: Fraction) -> Fraction:
        return self.real + self.delta * d

    def __repr__(self) -> str:
        if self.delta == 0:
            return str(self.real)
        return f"{self.real}{'+' if self.delta > 0 else '-'}{abs(self.delta)}d"


ZERO = DeltaRational(0)


class BoundEntry:
    __slots__ = ('value', 'reason')

    def __init__(self, value: DeltaRational, reason: Reason):
        self.value = value
        self.reason = reason


class Tableau:
    """
    Incremental simplex with bound trail.

    ``push`` returns a trail mark; ``pop(mark)`` restores the bounds. The
    assignment is not restored: rows always hold, and non-basic values stay
    inside the (looser) restored bounds.
    """

    def __init__(self, budget: Optional[Budget] = None):
        self.budget = budget or Budget.unlimited()
        self.rows: Dict[int, Dict[int, Fraction]] = {}
        self.cols: Dict[int, Set[int]] = defaultdict(set)
        self.assign: Dict[int, DeltaRational] = {}
        self.lower: Dict[int, BoundEntry] = {}
        self.upper: Dict[int, BoundEntry] = {}
        self._trail: List[Tuple[bool, int, Optional[BoundEntry]]] = []
        self.pivots = 0

    # -- structure -----------------------------------------------------

    def add_var(self, var: int) -> None:
        if var not in self.assign:
            self.assign[var] = ZERO

    def has_var(self, var: int) -> bool:
        return var in self.assign

    def add_row(self, slack: int, coeffs: Mapping[int, Fraction]) -> None:
        """Register ``slack = sum(coeffs[v] * v)`` with ``slack`` basic."""
        row: Dict[int, Fraction] = {}
        for var, c in coeffs.items():
            self.add_var(var)
            if var in self.rows:
                for inner, ic in self.rows[var].items():
                    row[inner] = row.get(inner, Fraction(0)) + c * ic
            else:
                row[var] = row.get(var, Fraction(0)) + c
        row = {v: c for v, c in row.items() if c != 0}
        self.rows[slack] = row
        for var in row:
            self.cols[var].add(slack)
        self.assign[slack] = self._row_value(row)

    def _row_value(self, row: Mapping[int, Fraction]) -> DeltaRational:
        total = DeltaRational(0)
        for var, c in row.items():
            total = total + self.assign[var] * c
        return total

    # -- bounds --------------------------------------------------------

    def push(self) -> int:
        return len(self._trail)

    def pop(self, mark: int) -> None:
        while len(self._trail) > mark:
            is_upper, var, previous = self._trail.pop()
            table = self.upper if is_upper else self.lower
            if previous is None:
                table.pop(var, None)
            else:
                table[var] = previous

    def assert_upper(self, var: int, value: DeltaRational, reason: Reason) -> Optional[Reason]:
        """Tighten ``var <= value``; returns a conflict reason or None."""
        current = self.upper.get(var)
        if current is not None and current.value <= value:
            return None
        low = self.lower.get(var)
        if low is not None and low.value > value:
            return reason | low.reason
        self._trail.append((True, var, current))
        self.upper[var] = BoundEntry(value, reason)
        if var not in self.rows and self.assign[var] > value:
            self._update(var, value)
        return None

    def assert_lower(self, var: int, value: DeltaRational, reason: Reason) -> Optional[Reason]:
        """Tighten ``var >= value``; returns a conflict reason or None."""
        current = self.lower.get(var)
        if current is not None and current.value >= value:
            return None
        up = self.upper.get(var)
        if up is not None and up.value < value:
            return reason | up.reason
        self._trail.append((False, var, current))
        self.lower[var] = BoundEntry(value, reason)
        if var not in self.rows and self.assign[var] < value:
            self._update(var, value)
        return None

    # -- search --------------------------------------------------------

    def _update(self, var: int, value: DeltaRational) -> None:
        diff = value - self.assign[var]
        for basic in self.cols[var]:
            self.assign[basic] = self.assign[basic] + diff * self.rows[basic][var]
        self.assign[var] = value

    def _violated(self) -> Optional[int]:
        best = None
        for basic in self.rows:
            value = self.assign[basic]
            low = self.lower.get(basic)
            up = self.upper.get(basic)
            if (low is not None and value < low.value) or (up is not None and value > up.value):
                if best is None or basic < best:
                    best = basic
        return best

    def check(self) -> Optional[Reason]:
        """
        Restore feasibility of all bounds.

        Returns:
            None when feasible, otherwise the union of the reasons of the
            bounds in the infeasible row
        """
        while True:
            self.budget.poll()
            basic = self._violated()
            if basic is None:
                return None
            row = self.rows[basic]
            low = self.lower.get(basic)
            if low is not None and self.assign[basic] < low.value:
                entering = self._entering(row, increase=True)
                if entering is None:
                    return self._explain(basic, row, below=True)
                self._pivot_and_update(basic, entering, low.value)
            else:
                entering = self._entering(row, increase=False)
                if entering is None:
                    return self._explain(basic, row, below=False)
                self._pivot_and_update(basic, entering, self.upper[basic].value)

    def _entering(self, row: Mapping[int, Fraction], increase: bool) -> Optional[int]:
        best = None
        for var, c in row.items():
            up_dir = (c > 0) == increase
            if up_dir:
                bound = self.upper.get(var)
                ok = bound is None or self.assign[var] < bound.value
            else:
                bound = self.lower.get(var)
                ok = bound is None or self.assign[var] > bound.value
            if ok and (best is None or var < best):
                best = var
        return best

    def _explain(self, basic: int, row: Mapping[int, Fraction], below: bool) -> Reason:
        parts = [(self.lower if below else self.upper)[basic].reason]
        for var, c in row.items():
            use_upper = (c > 0) == below
            parts.append((self.upper if use_upper else self.lower)[var].reason)
        return frozenset().union(*parts)

    def _pivot_and_update(self, basic: int, entering: int, value: DeltaRational) -> None:
        coeff = self.rows[basic][entering]
        theta = (value - self.assign[basic]) / coeff
        self.assign[basic] = value
        self.assign[entering] = self.assign[entering] + theta
        for other in self.cols[entering]:
            if other != basic:
                self.assign[other] = self.assign[other] + theta * self.rows[other][entering]
        self._pivot(basic, entering)

    def _pivot(self, basic: int, entering: int) -> None:
        self.pivots += 1
        row = self.rows.pop(basic)
        for var in row:
            self.cols[var].discard(basic)
        a = row.pop(entering)
        new_row = {var: -c / a for var, c in row.items()}
        new_row[basic] = Fraction(1) / a
        for var in new_row:
            self.cols[var].add(entering)
        users = list(self.cols.pop(entering, set()))
        for other in users:
            other_row = self.rows[other]
            c = other_row.pop(entering)
            for var, nc in new_row.items():
                value = other_row.get(var, Fraction(0)) + c * nc
                if value == 0:
                    if var in other_row:
                        del other_row[var]
                        self.cols[var].discard(other)
                else:
                    if var not in other_row:
                        self.cols[var].add(other)
                    other_row[var] = value
        self.rows[entering] = new_row

    # -- models --------------------------------------------------------

    def materialize_delta(self) -> Fraction:
        """Largest d <= 1 for which every bound holds with delta := d."""
        d = Fraction(1)
        for var, value in self.assign.items():
            low = self.lower.get(var)
            if low is not None:
                d = _shrink(d, low.value, value)
            up = self.upper.get(var)
            if up is not None:
                d = _shrink(d, value, up.value)
        return d

    def value(self, var: int) -> DeltaRational:
        return self.assign.get(var, ZERO)


def _shrink(d: Fraction, small: DeltaRational, large: DeltaRational) -> Fraction:
    # small <= large holds symbolically; keep it once delta is a number
    if small.real < large.real and small.delta > large.delta:
        limit = (large.real - small.real) / (small.delta - large.delta)
        if limit < d:
            return limit
    return d
