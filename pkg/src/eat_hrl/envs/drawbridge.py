"""Drawbridge: a 1-D ship channel blocked by a timed gate.

The ship accelerates along a [0, 1] channel. A gate sits at coordinate 0.5
and holds the ship until the bridge has fully opened, which takes exactly
63 steps from the opening start. The noisy variant draws the opening start
uniformly from {400, 500, 600} per episode; the deterministic variant
always opens at 400.
"""

from __future__ import annotations

import numpy as np

from .base import Env, EventKind, EventRecord, StepOutcome

GATE_POSITION = 0.5
GOAL_POSITION = 0.95
OPENING_STEPS = 63
OPENING_TIMES = (400, 500, 600)
THRUST_GAIN = 0.02
DRAG = 0.002


def sample_t_open(rng: np.random.Generator, noisy: bool) -> int:
    """Opening start time: fixed 400, or uniform over {400, 500, 600}."""
    if not noisy:
        return OPENING_TIMES[0]
    return int(OPENING_TIMES[int(rng.integers(0, len(OPENING_TIMES)))])


class Drawbridge(Env):

    horizon = 1000
    observation_dim = 3
    action_dim = 1
    subgoal_dim = 1
    goal_tolerance = 0.05

    action_low = np.array([-1.0])
    action_high = np.array([1.0])
    subgoal_low = np.array([0.0])
    subgoal_high = np.array([1.0])

    def __init__(self, noisy: bool = False):
        self.noisy = noisy
        self._rng: np.random.Generator | None = None
        self._done = True

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self.t_open = sample_t_open(self._rng, self.noisy)
        self.position = 0.05
        self.velocity = 0.0
        self.time = 0
        self._done = False
        self._succeeded = False
        return self._observation()

    def openness(self, time: int | None = None) -> float:
        t = self.time if time is None else time
        return float(np.clip((t - self.t_open) / OPENING_STEPS, 0.0, 1.0))

    def _observation(self) -> np.ndarray:
        return np.array([self.position, self.velocity, self.openness()])

    def achieved_projection(self, observation: np.ndarray) -> np.ndarray:
        return np.asarray(observation, dtype=np.float64)[:1]

    def success(self, observation: np.ndarray) -> bool:
        return bool(np.asarray(observation)[0] >= GOAL_POSITION)

    def step(self, action: np.ndarray) -> StepOutcome:
        self._require_live(self._done)
        thrust = float(np.clip(np.asarray(action).reshape(-1)[0], -1.0, 1.0))

        self.velocity += THRUST_GAIN * thrust - DRAG * self.velocity
        new_position = self.position + self.velocity
        if self.position <= GATE_POSITION and new_position > GATE_POSITION and self.openness() < 1.0:
            new_position = GATE_POSITION
            self.velocity = 0.0
        if new_position < 0.0:
            new_position = 0.0
            self.velocity = 0.0
        self.position = min(new_position, 1.0)
        self.time += 1

        events = []
        if self.time == self.t_open:
            events.append(EventRecord(EventKind.BRIDGE_OPENING_STARTED, self.time))
        if self.time == self.t_open + OPENING_STEPS:
            events.append(EventRecord(EventKind.BRIDGE_PASSABLE, self.time))

        obs = self._observation()
        succeeded_now = self.position >= GOAL_POSITION
        reward = 0.0 if self._succeeded else -1.0
        if succeeded_now:
            self._succeeded = True
        self._done = succeeded_now or self.time >= self.horizon
        return StepOutcome(observation=obs, reward=reward, done=self._done, events=tuple(events))
