"""Emergency action termination: predicates, threshold state, and the scan.

Each original time step, every level above the bottom produces a proposal
by re-evaluating its live policy at the current state with the random
element frozen at action-selection time. A proposal that looks better
(Q strategy) or points somewhere notably different (geometric strategy)
terminates the in-flight action at that level and everything below it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .core import TimedSubgoal

__all__ = [
    "QBasedStrategy",
    "GeometricStrategy",
    "ProposalContext",
    "should_terminate_q",
    "should_terminate_geom",
    "TerminationReport",
    "eat_scan",
]

logger = logging.getLogger(__name__)


@dataclass
class QBasedStrategy:
    """Threshold state for the changing-Q termination condition.

    Keeps an exponential-moving estimate of the mean and variance of the
    critic values observed at action starts; the termination threshold is
    alpha times the resulting standard deviation estimate.
    """

    alpha: float
    beta: float = 0.999
    mean: float = 0.0
    var: float = 0.0
    initialized: bool = False

    def __post_init__(self) -> None:
        if not (self.alpha >= 0.0 or math.isinf(self.alpha)):
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")

    @property
    def delta(self) -> float:
        return math.sqrt(max(self.var, 0.0))

    def update(self, q_at_start: float) -> "QBasedStrategy":
        """Fold one action-start critic value into the running estimate."""
        q = float(q_at_start)
        if not math.isfinite(q):
            raise ValueError(f"q_at_start must be finite, got {q}")
        if not self.initialized:
            self.mean = q
            self.var = 0.0
            self.initialized = True
            return self
        self.mean = self.beta * self.mean + (1.0 - self.beta) * q
        self.var = self.beta * self.var + (1.0 - self.beta) * (q - self.mean) ** 2
        return self


def update_q_stats(strategy: QBasedStrategy, q_at_start: float) -> QBasedStrategy:
    return strategy.update(q_at_start)


def should_terminate_q(q_prop: float, q_cur: float, strategy: QBasedStrategy) -> bool:
    """True iff the proposal's value exceeds the current action's value by
    more than alpha times the running standard deviation of start values."""
    if not strategy.initialized:
        logger.debug("Q termination requested before any action-start value was recorded")
        return False
    threshold = strategy.alpha * strategy.delta
    if not math.isfinite(threshold):
        return False
    return (float(q_prop) - float(q_cur)) > threshold


@dataclass
class GeometricStrategy:
    """Threshold for the changing-target condition; alpha in [0, 2]."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 2.0:
            raise ValueError(f"geometric alpha must lie in [0, 2], got {self.alpha}")


def should_terminate_geom(
    x_prop: np.ndarray,
    budget_prop: int,
    x_cur: np.ndarray,
    budget_cur: int,
    x_state: np.ndarray,
    alpha: float,
) -> bool:
    """Compare the state-projection velocities the two actions imply.

    With v1 = (x_prop - x_state) / budget_prop and v2 likewise for the
    current action, terminate iff ||v1 - v2|| > (alpha / 2) (||v1|| + ||v2||).
    """
    if budget_prop < 1 or budget_cur < 1:
        raise ValueError("budgets must be >= 1")
    x_state = np.asarray(x_state, dtype=np.float64)
    v1 = (np.asarray(x_prop, dtype=np.float64) - x_state) / float(budget_prop)
    v2 = (np.asarray(x_cur, dtype=np.float64) - x_state) / float(budget_cur)
    lhs = float(np.linalg.norm(v1 - v2))
    rhs = 0.5 * float(alpha) * (float(np.linalg.norm(v1)) + float(np.linalg.norm(v2)))
    return lhs > rhs


@dataclass(frozen=True)
class ProposalContext:
    """Inputs to a termination predicate at one level and time step."""

    proposal: TimedSubgoal
    current_view: TimedSubgoal
    x_state: np.ndarray


class LevelMonitor(Protocol):
    """Per-level hooks the scan needs; levels are monitored top-down."""

    level: int

    def propose(self) -> TimedSubgoal:
        """Policy re-evaluated at the current state with the frozen noise."""
        ...

    def evaluate(self, proposal: TimedSubgoal) -> tuple[bool, float]:
        """Run the configured predicate; returns (fire, gap diagnostic)."""
        ...


@dataclass(frozen=True)
class TerminationReport:
    level: int | None
    time: int
    strategy: str = ""
    gap: float = 0.0

    @property
    def fired(self) -> bool:
        return self.level is not None


def eat_scan(
    monitors: Sequence[LevelMonitor],
    interrupt: Callable[[int, TimedSubgoal, float], None],
    now: int,
    strategy_name: str = "",
) -> TerminationReport:
    """Top-down scan over levels L..2 with first-trigger-wins semantics.

    On the first level whose predicate fires, ``interrupt`` must terminate
    the in-flight actions at that level and every level below, hand the
    finished segments to training, and designate fresh actions with fresh
    random elements. Levels above the trigger are left untouched and the
    scan stops.
    """
    ordered = sorted(monitors, key=lambda m: m.level, reverse=True)
    for mon in ordered:
        if mon.level < 2:
            raise ValueError("only levels >= 2 are monitored")
        proposal = mon.propose()
        fire, gap = mon.evaluate(proposal)
        if fire:
            interrupt(mon.level, proposal, gap)
            return TerminationReport(level=mon.level, time=now, strategy=strategy_name, gap=gap)
    return TerminationReport(level=None, time=now, strategy=strategy_name)
