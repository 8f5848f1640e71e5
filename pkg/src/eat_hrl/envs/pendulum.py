"""Pendulum swing-up with a stabilization success criterion.

Classic torque-limited swing-up: the angle is measured from upright, the
dynamics are integrated with semi-implicit Euler at dt = 0.05, and success
requires holding the pole upright and slow for 10 consecutive steps.
"""

from __future__ import annotations

import numpy as np

from .base import Env, StepOutcome

DT = 0.05
G = 10.0
MASS = 1.0
LENGTH = 1.0
MAX_TORQUE = 2.0
MAX_SPEED = 8.0
UPRIGHT_ANGLE = 0.15
UPRIGHT_SPEED = 0.5
UPRIGHT_STEPS = 10


def wrap_angle(theta: float) -> float:
    return float((theta + np.pi) % (2.0 * np.pi) - np.pi)


class Pendulum(Env):

    horizon = 300
    observation_dim = 3
    action_dim = 1
    subgoal_dim = 2
    goal_tolerance = 0.15

    action_low = np.array([-MAX_TORQUE])
    action_high = np.array([MAX_TORQUE])
    subgoal_low = np.array([-1.0, -1.0])
    subgoal_high = np.array([1.0, 1.0])

    def __init__(self):
        self._done = True

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self.theta = wrap_angle(np.pi + self._rng.uniform(-0.5, 0.5))
        self.theta_dot = self._rng.uniform(-0.5, 0.5)
        self.time = 0
        self.upright_streak = 0
        self._done = False
        return self._observation()

    def _observation(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta), self.theta_dot])

    def achieved_projection(self, observation: np.ndarray) -> np.ndarray:
        return np.asarray(observation, dtype=np.float64)[:2]

    def success(self, observation: np.ndarray) -> bool:
        obs = np.asarray(observation)
        angle = np.arctan2(obs[1], obs[0])
        return bool(abs(angle) < UPRIGHT_ANGLE and abs(obs[2]) < UPRIGHT_SPEED)

    def step(self, action: np.ndarray) -> StepOutcome:
        self._require_live(self._done)
        u = float(np.clip(np.asarray(action).reshape(-1)[0], -MAX_TORQUE, MAX_TORQUE))

        cost = wrap_angle(self.theta) ** 2 + 0.1 * self.theta_dot**2 + 0.001 * u**2

        accel = 3.0 * G / (2.0 * LENGTH) * np.sin(self.theta) + 3.0 / (MASS * LENGTH**2) * u
        self.theta_dot = float(np.clip(self.theta_dot + accel * DT, -MAX_SPEED, MAX_SPEED))
        self.theta = wrap_angle(self.theta + self.theta_dot * DT)
        self.time += 1

        obs = self._observation()
        if self.success(obs):
            self.upright_streak += 1
        else:
            self.upright_streak = 0
        stabilized = self.upright_streak >= UPRIGHT_STEPS
        self._done = stabilized or self.time >= self.horizon
        return StepOutcome(observation=obs, reward=-cost, done=self._done, events=())
