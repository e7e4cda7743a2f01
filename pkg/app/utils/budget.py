"""Cooperative resource limits shared by the engines of one solve."""
import sys
import time
from typing import Optional

from app.utils.exceptions import BudgetExhausted


class Budget:
    """
    Deadline plus search limits.

    Engines call ``poll()`` at every search node and simplex pivot; the
    first call past the deadline raises ``BudgetExhausted``.
    """

    def __init__(
        self,
        timeout: Optional[float] = None,
        max_branch_depth: int = 64,
        max_nodes: Optional[int] = None,
    ):
        self.deadline = time.monotonic() + timeout if timeout is not None else None
        self.max_branch_depth = max_branch_depth
        self.max_nodes = max_nodes
        self.nodes = 0

    @classmethod
    def unlimited(cls) -> "Budget":
        return cls(timeout=None)

    def poll(self) -> None:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise BudgetExhausted(f"node limit {self.max_nodes} reached")
        if self.deadline is not None and self.nodes % 16 == 0 and time.monotonic() > self.deadline:
            raise BudgetExhausted("deadline reached")

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline

    def remaining(self) -> Optional[float]:
        if self.deadline is None:
            return None
        return max(0.0, self.deadline - time.monotonic())


def raise_recursion_limit(limit: int) -> int:
    """Raise the interpreter recursion limit to at least ``limit``; never lowers it."""
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)
    return sys.getrecursionlimit()
