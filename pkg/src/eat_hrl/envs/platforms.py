"""Platforms: a 2-D hopper over two oscillating platforms.

The agent starts on a ground ledge, must cross two horizontally oscillating
platforms, and reach a goal ledge. The noisy variant freezes the active
platform (the one nearest the agent) with a fixed per-step probability; at
most two freezes happen per episode, and a frozen platform keeps its
position for the rest of the episode.
"""

from __future__ import annotations

import numpy as np

from .base import Env, EventKind, EventRecord, StepOutcome

GRAVITY = 0.004
ACCEL_X = 0.0015
JUMP_SPEED = 0.05
MAX_VX = 0.012
MAX_VY = 0.06
SUPPORT_EPS = 0.02

GROUND_Y = 0.05
GROUND_SPAN = (0.0, 0.22)
GOAL_Y = 0.61
GOAL_SPAN = (0.78, 1.0)

PLATFORM_Y = (0.24, 0.43)
PLATFORM_CENTER = (0.42, 0.62)
PLATFORM_AMP = 0.14
PLATFORM_OMEGA = (2.0 * np.pi / 190.0, 2.0 * np.pi / 150.0)
PLATFORM_HALF_WIDTH = 0.1

FREEZE_PROBABILITY = 0.005
MAX_FREEZES = 2


class Platforms(Env):

    horizon = 600
    observation_dim = 6
    action_dim = 2
    subgoal_dim = 2
    goal_tolerance = 0.1

    action_low = np.array([-1.0, -1.0])
    action_high = np.array([1.0, 1.0])
    subgoal_low = np.array([0.0, 0.0])
    subgoal_high = np.array([1.0, 1.0])

    def __init__(self, freeze_probability: float = 0.0):
        if not 0.0 <= freeze_probability < 1.0:
            raise ValueError(f"freeze_probability must lie in [0, 1), got {freeze_probability}")
        self.freeze_probability = freeze_probability
        self._done = True

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self.phases = self._rng.uniform(0.0, 2.0 * np.pi, size=2)
        self.position = np.array([0.08, GROUND_Y])
        self.velocity = np.zeros(2)
        self.time = 0
        self.frozen = [False, False]
        self.frozen_positions = [0.0, 0.0]
        self.freeze_count = 0
        self._done = False
        self._succeeded = False
        return self._observation()

    def platform_x(self, k: int, time: int | None = None) -> float:
        if self.frozen[k]:
            return self.frozen_positions[k]
        t = self.time if time is None else time
        return float(PLATFORM_CENTER[k] + PLATFORM_AMP * np.sin(PLATFORM_OMEGA[k] * t + self.phases[k]))

    def _observation(self) -> np.ndarray:
        return np.array(
            [
                self.position[0],
                self.position[1],
                self.velocity[0],
                self.velocity[1],
                self.platform_x(0),
                self.platform_x(1),
            ]
        )

    def achieved_projection(self, observation: np.ndarray) -> np.ndarray:
        return np.asarray(observation, dtype=np.float64)[:2]

    def success(self, observation: np.ndarray) -> bool:
        obs = np.asarray(observation)
        return bool(GOAL_SPAN[0] <= obs[0] <= GOAL_SPAN[1] and abs(obs[1] - GOAL_Y) <= SUPPORT_EPS)

    def _active_platform(self) -> int:
        # nearest platform to the agent, vertical distance dominating
        d = [
            abs(self.position[1] - PLATFORM_Y[k]) + 0.25 * abs(self.position[0] - self.platform_x(k))
            for k in range(2)
        ]
        return int(np.argmin(d))

    def _maybe_freeze(self) -> list[EventRecord]:
        if self.freeze_probability <= 0.0 or self.freeze_count >= MAX_FREEZES:
            return []
        if self._rng.uniform() >= self.freeze_probability:
            return []
        k = self._active_platform()
        if self.frozen[k]:
            # the active platform is already stuck; the event hits the other one
            k = 1 - k
            if self.frozen[k]:
                return []
        self.frozen[k] = True
        self.frozen_positions[k] = float(self.platform_x(k))
        self.freeze_count += 1
        return [EventRecord(EventKind.PLATFORM_FROZEN, self.time)]

    def _support_y(self) -> float | None:
        """Height of the surface currently under the agent's feet, if any."""
        x, y = self.position
        candidates = []
        if GROUND_SPAN[0] <= x <= GROUND_SPAN[1]:
            candidates.append(GROUND_Y)
        if GOAL_SPAN[0] <= x <= GOAL_SPAN[1]:
            candidates.append(GOAL_Y)
        for k in range(2):
            if abs(x - self.platform_x(k)) <= PLATFORM_HALF_WIDTH:
                candidates.append(PLATFORM_Y[k])
        for level in candidates:
            if abs(y - level) <= SUPPORT_EPS and self.velocity[1] <= 0.0:
                return level
        return None

    def step(self, action: np.ndarray) -> StepOutcome:
        self._require_live(self._done)
        a = np.clip(np.asarray(action, dtype=np.float64).reshape(-1)[:2], -1.0, 1.0)

        self.time += 1
        events = self._maybe_freeze()

        support = self._support_y()
        self.velocity[0] += ACCEL_X * a[0]
        if support is not None:
            self.position[1] = support
            self.velocity[1] = JUMP_SPEED * a[1] if a[1] > 0.0 else 0.0
        else:
            self.velocity[1] -= GRAVITY
        self.velocity[0] = float(np.clip(self.velocity[0], -MAX_VX, MAX_VX))
        self.velocity[1] = float(np.clip(self.velocity[1], -MAX_VY, MAX_VY))

        self.position = self.position + self.velocity
        self.position[0] = float(np.clip(self.position[0], 0.0, 1.0))
        if self.position[1] < 0.0:
            self.position[1] = 0.0
            self.velocity[1] = 0.0
        landing = self._support_y()
        if landing is not None:
            self.position[1] = landing
            self.velocity[1] = 0.0

        obs = self._observation()
        succeeded_now = self.success(obs)
        reward = 0.0 if self._succeeded else -1.0
        if succeeded_now:
            self._succeeded = True
        self._done = succeeded_now or self.time >= self.horizon
        return StepOutcome(observation=obs, reward=reward, done=self._done, events=tuple(events))


def make_noisy_platforms() -> Platforms:
    return Platforms(freeze_probability=FREEZE_PROBABILITY)
