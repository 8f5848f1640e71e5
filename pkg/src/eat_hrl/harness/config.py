"""Experiment configuration: schema, validation, JSON loading.

Configs are strict: unknown keys anywhere in the document are errors, and
algorithm/strategy combinations are validated up front (the geometric
strategy carries no smoothing constant, the plain baselines carry no
threshold at all).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..envs import ENV_NAMES
from ..sac import SacConfig

__all__ = ["ALGORITHMS", "StrategyConfig", "ExperimentConfig", "load_config", "config_from_dict"]

ALGORITHMS = ("HiTS", "HiTS+VariableDiscountSAC", "EAT(Q)", "EAT(geom)")


@dataclass
class StrategyConfig:
    alpha: float | None = None
    beta: float | None = None


@dataclass
class ExperimentConfig:
    environment: str
    algorithm: str
    total_env_steps: int
    eval_interval: int
    eval_episodes: int
    master_seed: int
    max_actions_in_episode: int
    low: SacConfig
    high: SacConfig
    hindsight_goals: int = 3
    goal_tolerance: float | None = None
    first_touch: bool = False
    strategy: StrategyConfig = field(default_factory=StrategyConfig)

    def __post_init__(self) -> None:
        if self.environment not in ENV_NAMES:
            raise ValueError(f"unknown environment {self.environment!r}; expected one of {ENV_NAMES}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.total_env_steps < 0:
            raise ValueError("total_env_steps must be >= 0")
        if self.eval_interval < 1:
            raise ValueError("eval_interval must be >= 1")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be >= 1")
        if self.max_actions_in_episode < 1:
            raise ValueError("max_actions_in_episode must be >= 1")
        self._check_strategy()
        if self.algorithm == "HiTS":
            if self.high.time_discounting:
                raise ValueError("HiTS uses per-decision discounting; set high.time_discounting false")
        else:
            if not self.high.time_discounting:
                raise ValueError(f"{self.algorithm} requires high.time_discounting true")

    def _check_strategy(self) -> None:
        s = self.strategy
        if self.algorithm in ("HiTS", "HiTS+VariableDiscountSAC"):
            if s.alpha is not None or s.beta is not None:
                raise ValueError(f"{self.algorithm} carries no termination strategy parameters")
            return
        if s.alpha is None:
            raise ValueError(f"{self.algorithm} requires strategy.alpha")
        if self.algorithm == "EAT(Q)":
            if s.beta is None:
                self.strategy = StrategyConfig(alpha=s.alpha, beta=0.999)
        elif self.algorithm == "EAT(geom)":
            if s.beta is not None:
                raise ValueError("EAT(geom) carries no smoothing constant beta")
            if not 0.0 <= s.alpha <= 2.0:
                raise ValueError(f"EAT(geom) alpha must lie in [0, 2], got {s.alpha}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["low"]["hidden"] = list(self.low.hidden)
        d["high"]["hidden"] = list(self.high.hidden)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_SAC_KEYS = {
    "discount",
    "learning_rate",
    "batch_size",
    "polyak",
    "entropy_coeff",
    "target_entropy",
    "entropy_lr",
    "grad_steps_per_env_step",
    "buffer_capacity",
    "hidden",
    "learning_start",
    "random_action_fraction",
    "deterministic_fraction",
    "time_discounting",
}

_TOP_KEYS = {
    "environment",
    "algorithm",
    "total_env_steps",
    "eval_interval",
    "eval_episodes",
    "master_seed",
    "max_actions_in_episode",
    "low",
    "high",
    "hindsight_goals",
    "goal_tolerance",
    "first_touch",
    "strategy",
}

_STRATEGY_KEYS = {"alpha", "beta"}


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown config keys in {where}: {sorted(unknown)}")


def _sac_from_dict(d: dict, where: str) -> SacConfig:
    if not isinstance(d, dict):
        raise ValueError(f"{where} must be an object")
    _reject_unknown(d, _SAC_KEYS, where)
    kwargs = dict(d)
    if "hidden" in kwargs:
        kwargs["hidden"] = tuple(int(h) for h in kwargs["hidden"])
    return SacConfig(**kwargs)


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ValueError("config root must be an object")
    _reject_unknown(d, _TOP_KEYS, "config root")
    for key in ("environment", "algorithm", "total_env_steps", "eval_interval",
                "eval_episodes", "master_seed", "max_actions_in_episode", "low", "high"):
        if key not in d:
            raise ValueError(f"missing config key {key!r}")
    strategy = d.get("strategy", {})
    if not isinstance(strategy, dict):
        raise ValueError("strategy must be an object")
    _reject_unknown(strategy, _STRATEGY_KEYS, "strategy")
    return ExperimentConfig(
        environment=d["environment"],
        algorithm=d["algorithm"],
        total_env_steps=int(d["total_env_steps"]),
        eval_interval=int(d["eval_interval"]),
        eval_episodes=int(d["eval_episodes"]),
        master_seed=int(d["master_seed"]),
        max_actions_in_episode=int(d["max_actions_in_episode"]),
        low=_sac_from_dict(d["low"], "low"),
        high=_sac_from_dict(d["high"], "high"),
        hindsight_goals=int(d.get("hindsight_goals", 3)),
        goal_tolerance=d.get("goal_tolerance"),
        first_touch=bool(d.get("first_touch", False)),
        strategy=StrategyConfig(alpha=strategy.get("alpha"), beta=strategy.get("beta")),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
