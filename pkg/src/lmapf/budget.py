"""Shared search budget: wall-clock deadline and/or expansion cap.

One Budget instance is threaded through all planning phases of a step, so
the cap bounds their combined work. Expansion-cap-only budgets keep runs
reproducible; deadlines match benchmark wall-clock limits. Whichever trips
first ends the work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional


@dataclass
class Budget:
    deadline: Optional[float] = None  # absolute time.perf_counter() value
    max_expansions: Optional[int] = None
    expansions: int = 0

    @classmethod
    def start(
        cls,
        time_limit_s: Optional[float] = None,
        max_expansions: Optional[int] = None,
    ) -> "Budget":
        deadline = time.perf_counter() + time_limit_s if time_limit_s is not None else None
        return cls(deadline=deadline, max_expansions=max_expansions)

    def charge(self, amount: int = 1) -> None:
        self.expansions += amount

    def exhausted(self) -> bool:
        if self.max_expansions is not None and self.expansions >= self.max_expansions:
            return True
        if self.deadline is not None and time.perf_counter() >= self.deadline:
            return True
        return False

    @property
    def unbounded(self) -> bool:
        return self.deadline is None and self.max_expansions is None
