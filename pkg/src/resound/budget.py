from __future__ import annotations

import time
from dataclasses import dataclass

from .closed import BudgetExceeded

DEFAULT_STATES = 10**6
DEFAULT_SECONDS = 30.0


@dataclass(frozen=True)
class Budget:
    """Exploration limits: number of markings and wall-clock seconds."""

    states: int = DEFAULT_STATES
    seconds: float = DEFAULT_SECONDS

    def __post_init__(self):
        if self.states <= 0 or self.seconds <= 0:
            raise ValueError("budgets must be positive")

    def meter(self) -> "Meter":
        return Meter(self)

    def as_dict(self) -> dict:
        return {"states": self.states, "seconds": self.seconds}


class Meter:
    """Running consumption against a :class:`Budget`."""

    def __init__(self, budget: Budget):
        self.budget = budget
        self.states = 0
        self.started = time.monotonic()
        self.deadline = self.started + budget.seconds

    def tick(self, n: int = 1) -> None:
        self.states += n
        if self.states > self.budget.states:
            raise BudgetExceeded(f"state budget of {self.budget.states} exhausted")
        if self.states % 256 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded(f"time budget of {self.budget.seconds}s exhausted")

    def report(self) -> dict:
        return {
            "states": self.states,
            "elapsed_secs": round(time.monotonic() - self.started, 3),
            **{f"limit_{k}": v for k, v in self.budget.as_dict().items()},
        }
