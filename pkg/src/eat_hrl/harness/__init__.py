"""Experiment orchestration: configs, seeded runs, metrics, analysis."""

from __future__ import annotations

from .analysis import AnalysisResult, InterruptionRecord, analyze_interruptions, write_histogram_csv
from .config import ALGORITHMS, ExperimentConfig, StrategyConfig, config_from_dict, load_config
from .profiles import desk_profile, full_scale_profile
from .runner import (
    RunMetrics,
    build_agent,
    evaluate_policy,
    load_checkpoint,
    rollout_episodes,
    run_many,
    run_training,
    save_checkpoint,
)
from .seeds import STREAM_LABELS, derive_seeds, stream_rng

__all__ = [
    "ALGORITHMS",
    "AnalysisResult",
    "ExperimentConfig",
    "InterruptionRecord",
    "RunMetrics",
    "STREAM_LABELS",
    "StrategyConfig",
    "analyze_interruptions",
    "build_agent",
    "config_from_dict",
    "derive_seeds",
    "desk_profile",
    "evaluate_policy",
    "full_scale_profile",
    "load_checkpoint",
    "load_config",
    "rollout_episodes",
    "run_many",
    "run_training",
    "save_checkpoint",
    "stream_rng",
    "write_histogram_csv",
]
