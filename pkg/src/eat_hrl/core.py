"""Hierarchy-of-MDPs data model.

Levels, timed subgoals, in-flight actions, and reward segments, plus the
return arithmetic that discounts over elapsed original time steps rather
than over decision counts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LevelSpec",
    "HierarchySpec",
    "TimedSubgoal",
    "ActionState",
    "RewardSegment",
    "OpenSegment",
    "remaining_subgoal",
    "discounted_return",
    "close_segment",
]


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LevelSpec:
    """Static description of one hierarchy level.

    ``max_budget`` bounds a timed subgoal's budget in original time steps;
    ``goal_tolerance`` is the achievement radius in projection space.
    """

    index: int
    discount: float
    subgoal_dim: int
    max_budget: int
    goal_tolerance: float

    def __post_init__(self) -> None:
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"level {self.index}: discount must lie in (0, 1), got {self.discount}")
        if self.max_budget < 1:
            raise ValueError(f"level {self.index}: max_budget must be >= 1, got {self.max_budget}")
        if self.goal_tolerance <= 0.0:
            raise ValueError(f"level {self.index}: goal_tolerance must be > 0, got {self.goal_tolerance}")


@dataclass(frozen=True)
class HierarchySpec:
    """Ordered stack of level specs, bottom (index 1) first."""

    levels: tuple[LevelSpec, ...]

    def __post_init__(self) -> None:
        if len(self.levels) < 2:
            raise ValueError(f"a hierarchy needs at least 2 levels, got {len(self.levels)}")
        for expected, lv in enumerate(self.levels, start=1):
            if lv.index != expected:
                raise ValueError(f"levels must be indexed 1..L in order, position {expected} has index {lv.index}")
        gammas = [lv.discount for lv in self.levels]
        if any(lo > hi for lo, hi in zip(gammas, gammas[1:])):
            # Typical configurations are more farsighted at higher levels;
            # a violation is legal but worth flagging.
            warnings.warn(
                f"level discounts {gammas} are not monotone nondecreasing",
                stacklevel=2,
            )

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def level(self, index: int) -> LevelSpec:
        return self.levels[index - 1]


@dataclass(frozen=True)
class TimedSubgoal:
    """A target point in projection space plus a time budget to reach it."""

    target: np.ndarray
    budget: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", _readonly(self.target))
        if self.target.ndim != 1:
            raise ValueError(f"target must be a 1-D vector, got shape {self.target.shape}")
        if not np.all(np.isfinite(self.target)):
            raise ValueError("target must be finite")
        if int(self.budget) != self.budget or self.budget < 1:
            raise ValueError(f"budget must be an integer >= 1, got {self.budget}")
        object.__setattr__(self, "budget", int(self.budget))


@dataclass(frozen=True)
class ActionState:
    """An in-flight higher-level action.

    ``frozen_noise`` is the random element drawn when the action was
    selected; re-evaluating the policy with it yields proposals that move
    only because the state (or the parameters) moved.
    """

    action: TimedSubgoal
    start_time: int
    frozen_noise: np.ndarray
    level: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "frozen_noise", _readonly(self.frozen_noise))
        if self.start_time < 0:
            raise ValueError(f"start_time must be >= 0, got {self.start_time}")
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")


@dataclass(frozen=True)
class RewardSegment:
    """A closed variable-duration event: the unit of replay.

    Holds one reward per original time step covered, so any discount can be
    applied after the fact (relabeling may rewrite rewards before storage).
    """

    start_state: np.ndarray
    action: object
    rewards: tuple[float, ...]
    next_state: np.ndarray
    terminal: bool
    interrupted: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_state", _readonly(self.start_state))
        object.__setattr__(self, "next_state", _readonly(self.next_state))
        object.__setattr__(self, "rewards", tuple(float(r) for r in self.rewards))
        if len(self.rewards) < 1:
            raise ValueError("a segment covers at least one original time step")
        if not all(math.isfinite(r) for r in self.rewards):
            raise ValueError("segment rewards must be finite")

    @property
    def duration(self) -> int:
        return len(self.rewards)


class OpenSegment:
    """Mutable accumulator for a segment still in flight."""

    def __init__(self, start_state: np.ndarray, action: object, start_time: int) -> None:
        self.start_state = np.array(start_state, dtype=np.float64, copy=True)
        self.action = action
        self.start_time = int(start_time)
        self.rewards: list[float] = []
        self._closed = False

    def append_reward(self, r: float) -> None:
        if self._closed:
            raise RuntimeError("segment already closed")
        self.rewards.append(float(r))

    @property
    def duration(self) -> int:
        return len(self.rewards)


def close_segment(
    open_segment: OpenSegment,
    next_state: np.ndarray,
    terminal: bool,
    interrupted: bool,
) -> RewardSegment:
    """Freeze an open segment into an immutable record.

    Raises if the segment holds no rewards or was closed before.
    """
    if open_segment._closed:
        raise RuntimeError("segment already closed")
    if not open_segment.rewards:
        raise ValueError("cannot close a segment with no accumulated rewards")
    open_segment._closed = True
    return RewardSegment(
        start_state=open_segment.start_state,
        action=open_segment.action,
        rewards=tuple(open_segment.rewards),
        next_state=next_state,
        terminal=bool(terminal),
        interrupted=bool(interrupted),
    )


def remaining_subgoal(action_state: ActionState, now: int) -> TimedSubgoal:
    """View of an in-flight action as seen at time ``now``.

    Same target, budget shrunk by elapsed time and floored at one step: a
    live action never communicates a dead deadline to the level below.
    """
    if now < action_state.start_time:
        raise ValueError(f"clock regression: now={now} < start_time={action_state.start_time}")
    left = action_state.action.budget + action_state.start_time - now
    return TimedSubgoal(target=action_state.action.target, budget=max(1, left))


def discounted_return(rewards, gamma: float) -> float:
    """Sum of gamma^i * rewards[i], accumulated left to right."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    n = len(rewards)
    if n == 0:
        raise ValueError("rewards must be non-empty")
    total = 0.0
    weight = 1.0
    for r in rewards:
        total += weight * float(r)
        weight *= gamma
    return total
