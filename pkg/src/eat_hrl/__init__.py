"""Hierarchical RL with timed subgoals, variable-discount returns, and
emergency action termination."""

from __future__ import annotations

from .agent import EatMonitor, RelabelConfig, TwoLevelAgent, low_reward, relabel_hindsight_budget
from .core import (
    ActionState,
    HierarchySpec,
    LevelSpec,
    OpenSegment,
    RewardSegment,
    TimedSubgoal,
    close_segment,
    discounted_return,
    remaining_subgoal,
)
from .sac import CriticPair, ReplayBuffer, SacConfig, SacLearner, Transition, polyak_update, td_target
from .termination import (
    GeometricStrategy,
    ProposalContext,
    QBasedStrategy,
    TerminationReport,
    eat_scan,
    should_terminate_geom,
    should_terminate_q,
    update_q_stats,
)

__version__ = "0.1.0"

__all__ = [
    "ActionState",
    "CriticPair",
    "EatMonitor",
    "GeometricStrategy",
    "HierarchySpec",
    "LevelSpec",
    "OpenSegment",
    "ProposalContext",
    "QBasedStrategy",
    "RelabelConfig",
    "ReplayBuffer",
    "RewardSegment",
    "SacConfig",
    "SacLearner",
    "TerminationReport",
    "TimedSubgoal",
    "Transition",
    "TwoLevelAgent",
    "close_segment",
    "discounted_return",
    "eat_scan",
    "low_reward",
    "polyak_update",
    "relabel_hindsight_budget",
    "remaining_subgoal",
    "should_terminate_geom",
    "should_terminate_q",
    "td_target",
    "update_q_stats",
]
