"""Seeded training and evaluation loops with incremental metric emission.

A run is fully determined by (config, master seed): environment resets,
exploration, relabel sampling, training batches, and evaluation all draw
from named streams derived from the master seed, and metric/trace files are
written with stable formatting so equal runs are byte-identical.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agent import EatMonitor, RelabelConfig, TwoLevelAgent
from ..core import HierarchySpec, LevelSpec
from ..envs import Env, make_env
from ..nets import load_arrays, save_arrays
from ..termination import GeometricStrategy, QBasedStrategy
from .config import ExperimentConfig
from .seeds import derive_seeds, stream_rng

__all__ = [
    "RunMetrics",
    "build_agent",
    "run_training",
    "evaluate_policy",
    "save_checkpoint",
    "load_checkpoint",
    "run_many",
    "rollout_episodes",
]

_SEED_CAP = 2**63 - 1


@dataclass
class RunMetrics:
    rows: list[dict] = field(default_factory=list)

    def final_success_rate(self) -> float:
        if not self.rows:
            return 0.0
        return float(self.rows[-1]["success_rate"])


def build_agent(cfg: ExperimentConfig) -> tuple[TwoLevelAgent, EatMonitor | None, Env]:
    """Construct the environment, agent, and (for EAT variants) monitor."""
    env = make_env(cfg.environment)
    tol = cfg.goal_tolerance if cfg.goal_tolerance is not None else env.goal_tolerance
    max_budget = max(1, env.horizon // cfg.max_actions_in_episode)
    hierarchy = HierarchySpec(
        (
            LevelSpec(1, cfg.low.discount, env.subgoal_dim, max_budget, tol),
            LevelSpec(2, cfg.high.discount, env.subgoal_dim, max_budget, tol),
        )
    )
    relabel = RelabelConfig(hindsight_goals=cfg.hindsight_goals, tolerance=tol, first_touch=cfg.first_touch)
    agent = TwoLevelAgent(
        env,
        hierarchy,
        cfg.low,
        cfg.high,
        relabel,
        seed=derive_seeds(cfg.master_seed, "policy-init"),
    )
    monitor: EatMonitor | None = None
    if cfg.algorithm == "EAT(Q)":
        monitor = EatMonitor(agent, QBasedStrategy(alpha=float(cfg.strategy.alpha), beta=float(cfg.strategy.beta)))
    elif cfg.algorithm == "EAT(geom)":
        monitor = EatMonitor(agent, GeometricStrategy(alpha=float(cfg.strategy.alpha)))
    return agent, monitor, env


def _dump_row(row: dict) -> str:
    return json.dumps(row, sort_keys=True) + "\n"


def _interruption_row(episode: int, report) -> dict:
    gap_key = "q_gap" if report.strategy == "q" else "velocity_gap"
    return {
        "episode": episode,
        "time": report.time,
        "type": "interruption",
        "level": report.level,
        "strategy": report.strategy,
        gap_key: report.gap,
    }


def evaluate_policy(
    agent: TwoLevelAgent,
    monitor: EatMonitor | None,
    cfg: ExperimentConfig,
    episodes: int,
    tag: str,
    trace_rows: list[dict] | None = None,
) -> float:
    """Deterministic evaluation: mean actions, live termination monitor,
    no learning and no replay writes. Returns the success rate."""
    snapshot = agent.snapshot_episode()
    eval_env = make_env(cfg.environment)
    agent.env = eval_env
    successes = 0
    for i in range(episodes):
        obs = eval_env.reset(derive_seeds(cfg.master_seed, f"eval-{tag}-{i}"))
        agent.begin_episode(obs)
        succeeded = False
        while not agent.episode_done:
            outcome = agent.agent_step(train=False)
            if trace_rows is not None:
                for ev in outcome.events:
                    trace_rows.append(
                        {"episode": i, "time": ev.time, "type": "event", "kind": ev.kind.value}
                    )
            if eval_env.success(outcome.observation):
                succeeded = True
            if monitor is not None and not agent.episode_done:
                report = monitor.scan(train=False)
                if report.fired and trace_rows is not None:
                    trace_rows.append(_interruption_row(i, report))
        successes += int(succeeded)
    agent.restore_episode(snapshot)
    return successes / episodes


def run_training(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> RunMetrics:
    """Train until the step budget, evaluating on the configured cadence.

    Writes config.json, metrics.jsonl, trace.jsonl, and per-level
    checkpoints when ``out_dir`` is given.
    """
    out = Path(out_dir) if out_dir is not None else None
    metrics_fh = trace_fh = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(cfg.to_json() + "\n", encoding="utf-8")
        metrics_fh = open(out / "metrics.jsonl", "w", encoding="utf-8")
        trace_fh = open(out / "trace.jsonl", "w", encoding="utf-8")

    agent, monitor, env = build_agent(cfg)
    agent.attach_rngs(
        noise=stream_rng(cfg.master_seed, "exploration-noise"),
        exploration=stream_rng(cfg.master_seed, "exploration-fraction"),
        relabel=stream_rng(cfg.master_seed, "relabel-sampling"),
    )
    rng_env = stream_rng(cfg.master_seed, "environment")
    rng_train_low = stream_rng(cfg.master_seed, "train-low")
    rng_train_high = stream_rng(cfg.master_seed, "train-high")

    metrics = RunMetrics()
    episode = 0
    step = 0
    try:
        while step < cfg.total_env_steps:
            obs = env.reset(int(rng_env.integers(_SEED_CAP)))
            agent.begin_episode(obs)
            while not agent.episode_done and step < cfg.total_env_steps:
                outcome = agent.agent_step(train=True)
                step += 1
                if trace_fh is not None:
                    for ev in outcome.events:
                        trace_fh.write(
                            _dump_row({"episode": episode, "time": ev.time, "type": "event", "kind": ev.kind.value})
                        )
                if monitor is not None and not agent.episode_done:
                    report = monitor.scan(train=True)
                    if report.fired and trace_fh is not None:
                        trace_fh.write(_dump_row(_interruption_row(episode, report)))
                if step > cfg.low.learning_start:
                    agent.low.maybe_train(rng_train_low)
                if step > cfg.high.learning_start:
                    agent.high.maybe_train(rng_train_high)
                if step % cfg.eval_interval == 0:
                    rate = evaluate_policy(agent, monitor, cfg, cfg.eval_episodes, tag=str(step))
                    row = {
                        "env_step": step,
                        "success_rate": rate,
                        "episodes": episode,
                        "interruptions": len(monitor.reports) if monitor is not None else 0,
                    }
                    metrics.rows.append(row)
                    if metrics_fh is not None:
                        metrics_fh.write(_dump_row(row))
                        metrics_fh.flush()
            if agent.episode_done:
                episode += 1
    except FloatingPointError as err:
        diag = {
            "error": str(err),
            "step": step,
            "episode": episode,
            "master_seed": cfg.master_seed,
            "config": cfg.to_dict(),
        }
        if out is not None:
            (out / "diagnostic.json").write_text(json.dumps(diag, indent=2, sort_keys=True), encoding="utf-8")
        raise RuntimeError(
            f"non-finite loss at step {step}, episode {episode}, seed {cfg.master_seed}"
        ) from err
    finally:
        if metrics_fh is not None:
            metrics_fh.close()
        if trace_fh is not None:
            trace_fh.close()

    if out is not None:
        save_checkpoint(agent, out)
    return metrics


def _level_arrays(agent: TwoLevelAgent, which: str) -> dict[str, np.ndarray]:
    learner = agent.low if which == "low" else agent.high
    arrays: dict[str, np.ndarray] = {}
    nets = {
        "policy": learner.policy.net,
        "q1": learner.critics.q1,
        "q2": learner.critics.q2,
        "t1": learner.critics.t1,
        "t2": learner.critics.t2,
    }
    for name, net in nets.items():
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays[f"{name}.w{i}"] = w
            arrays[f"{name}.b{i}"] = b
    arrays["log_alpha"] = np.array([learner.log_alpha])
    return arrays


def save_checkpoint(agent: TwoLevelAgent, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for which in ("low", "high"):
        save_arrays(out / f"{which}.ckpt", _level_arrays(agent, which))


def load_checkpoint(agent: TwoLevelAgent, ckpt_dir: str | Path) -> None:
    for which in ("low", "high"):
        arrays = load_arrays(Path(ckpt_dir) / f"{which}.ckpt")
        learner = agent.low if which == "low" else agent.high
        nets = {
            "policy": learner.policy.net,
            "q1": learner.critics.q1,
            "q2": learner.critics.q2,
            "t1": learner.critics.t1,
            "t2": learner.critics.t2,
        }
        for name, net in nets.items():
            for i in range(len(net.weights)):
                net.weights[i] = arrays[f"{name}.w{i}"].copy()
                net.biases[i] = arrays[f"{name}.b{i}"].copy()
        learner.log_alpha = float(arrays["log_alpha"][0])


def rollout_episodes(
    cfg: ExperimentConfig,
    ckpt_dir: str | Path,
    episodes: int,
    trace_path: str | Path | None = None,
    tag: str = "rollout",
) -> float:
    """Run deterministic episodes from a checkpoint; optionally dump traces."""
    agent, monitor, _ = build_agent(cfg)
    load_checkpoint(agent, ckpt_dir)
    trace_rows: list[dict] | None = [] if trace_path is not None else None
    rate = evaluate_policy(agent, monitor, cfg, episodes, tag=tag, trace_rows=trace_rows)
    if trace_path is not None:
        with open(trace_path, "w", encoding="utf-8") as fh:
            for row in trace_rows:
                fh.write(_dump_row(row))
    return rate


def _run_one(args: tuple[ExperimentConfig, str]) -> list[dict]:
    cfg, out_dir = args
    return run_training(cfg, out_dir).rows


def run_many(jobs: list[tuple[ExperimentConfig, str]]) -> list[list[dict]]:
    """Run independent (config, out_dir) jobs, bounded by EAT_HRL_THREADS."""
    limit = int(os.environ.get("EAT_HRL_THREADS", "0")) or (os.cpu_count() or 1)
    workers = max(1, min(limit, len(jobs)))
    if workers == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
