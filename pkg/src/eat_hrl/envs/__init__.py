"""Benchmark environments behind a single seeded contract."""

from __future__ import annotations

from .base import Env, EventKind, EventRecord, RANDOM_EVENT_KINDS, StepOutcome
from .drawbridge import Drawbridge, sample_t_open
from .pendulum import Pendulum
from .platforms import FREEZE_PROBABILITY, Platforms

__all__ = [
    "Env",
    "EventKind",
    "EventRecord",
    "RANDOM_EVENT_KINDS",
    "StepOutcome",
    "Drawbridge",
    "Pendulum",
    "Platforms",
    "sample_t_open",
    "make_env",
    "ENV_NAMES",
]

ENV_NAMES = ("Pendulum", "Drawbridge", "NoisyDrawbridge", "Platforms", "NoisyPlatforms")


def make_env(name: str) -> Env:
    if name == "Pendulum":
        return Pendulum()
    if name == "Drawbridge":
        return Drawbridge(noisy=False)
    if name == "NoisyDrawbridge":
        return Drawbridge(noisy=True)
    if name == "Platforms":
        return Platforms(freeze_probability=0.0)
    if name == "NoisyPlatforms":
        return Platforms(freeze_probability=FREEZE_PROBABILITY)
    raise ValueError(f"unknown environment {name!r}; expected one of {ENV_NAMES}")
