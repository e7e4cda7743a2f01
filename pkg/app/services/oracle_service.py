"""Exhaustive enumeration over a finite box, used to cross-check the solver."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from app.models.base import VarSort
from app.models.formula import Cost, Model, WeightedFormula, check_model
from app.utils.exceptions import OracleError

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 10 ** 7


@dataclass
class OracleResult:
    """Best model in the box, or ``found=False`` when the box holds none."""

    found: bool
    model: Optional[Model] = None
    cost: Optional[Cost] = None
    points: int = 0

    def to_dict(self) -> Dict[str, object]:
        return {
            'found': self.found,
            'cost': [str(c) for c in self.cost] if self.cost is not None else None,
            'points': self.points,
        }


def brute_force_nia(
    f0: WeightedFormula,
    box: Tuple[int, int] = (-6, 6),
    max_points: int = DEFAULT_MAX_POINTS,
    boxes: Optional[Dict[int, Tuple[int, int]]] = None,
) -> OracleResult:
    """
    Enumerate every integer point of the box and every Boolean assignment.

    Args:
        f0: Weighted formula over Int and Bool variables
        box: Default [lo, hi] for Int variables
        max_points: Refuse boxes with more points than this
        boxes: Per-variable overrides of ``box``

    Returns:
        OracleResult with a hard model of least (bound, soft) cost

    Raises:
        OracleError: On Real variables or an oversized box
    """
    boxes = boxes or {}
    variables = f0.variables()
    ranges = []
    size = 1
    for v in variables:
        sort = f0.table.sort(v)
        if sort == VarSort.REAL:
            raise OracleError(f"cannot enumerate Real variable {f0.table.name(v)}")
        if sort == VarSort.BOOL:
            values = range(0, 2)
        else:
            lo, hi = boxes.get(v, box)
            if lo > hi:
                raise OracleError(f"empty box for {f0.table.name(v)}")
            values = range(lo, hi + 1)
        ranges.append(values)
        size *= len(values)
        if size > max_points:
            raise OracleError(f"box has more than {max_points} points")

    clauses = f0.hard + f0.soft
    best: Optional[Tuple[Cost, Dict[int, Fraction]]] = None
    points = 0
    for point in itertools.product(*ranges):
        points += 1
        values = {v: Fraction(x) for v, x in zip(variables, point)}
        holds, cost = check_model(clauses, values)
        if not holds:
            continue
        if best is None or cost < best[0]:
            best = (cost, values)
            if cost == (0, 0):
                break
    logger.debug(f"oracle enumerated {points} of {size} points")
    if best is None:
        return OracleResult(False, points=points)
    return OracleResult(True, Model(best[1]), best[0], points)
