"""Environment contract shared by all benchmarks.

Every environment is seeded at reset, steps in original (low-level) time,
and reports random occurrences through an explicit event log so that
interruption analysis can pair terminations with the events that caused
them.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass

import numpy as np


class EventKind(enum.Enum):
    BRIDGE_OPENING_STARTED = "BridgeOpeningStarted"
    BRIDGE_PASSABLE = "BridgePassable"
    PLATFORM_FROZEN = "PlatformFrozen"


# Kinds that originate from the environment's random stream; deterministic
# consequences (e.g. the bridge becoming passable a fixed time after the
# opening started) are logged but not treated as random events.
RANDOM_EVENT_KINDS = frozenset({EventKind.BRIDGE_OPENING_STARTED, EventKind.PLATFORM_FROZEN})


@dataclass(frozen=True)
class EventRecord:
    kind: EventKind
    time: int


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: float
    done: bool
    events: tuple[EventRecord, ...] = ()

    def __post_init__(self) -> None:
        if not np.isfinite(self.reward):
            raise ValueError(f"reward must be finite, got {self.reward}")


class Env(abc.ABC):
    """Single-owner, seeded environment.

    Equal seeds plus equal action sequences give bit-identical episodes.
    """

    horizon: int
    observation_dim: int
    action_dim: int
    subgoal_dim: int
    goal_tolerance: float

    # action bounds in environment units; policies emit values in (-1, 1)
    action_low: np.ndarray
    action_high: np.ndarray
    # bounds of the achieved projection, used to scale subgoal targets
    subgoal_low: np.ndarray
    subgoal_high: np.ndarray

    @abc.abstractmethod
    def reset(self, seed: int) -> np.ndarray:
        ...

    @abc.abstractmethod
    def step(self, action: np.ndarray) -> StepOutcome:
        ...

    @abc.abstractmethod
    def achieved_projection(self, observation: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def success(self, observation: np.ndarray) -> bool:
        ...

    def _require_live(self, done: bool) -> None:
        if done:
            raise RuntimeError("episode is done; call reset before stepping")
