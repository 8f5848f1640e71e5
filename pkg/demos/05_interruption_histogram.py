#!/usr/bin/env python3
"""Interruption-delay analysis: how soon after a random event does EAT react?

Trains a small EAT(geom) model, rolls out evaluation episodes with traces, and
prints the delay histogram between bridge-opening events and the following
emergency terminations.
"""

import tempfile
from pathlib import Path

from eat_hrl.harness import analyze_interruptions, desk_profile, rollout_episodes, run_training

root = Path(tempfile.mkdtemp(prefix="eat_hrl_fig3_"))
cfg = desk_profile("NoisyDrawbridge", "EAT(geom)", master_seed=0, total_env_steps=40_000)
cfg.eval_interval = 40_000
cfg.eval_episodes = 5

print(f"training EAT(geom) for {cfg.total_env_steps} steps ...")
run_training(cfg, out_dir=root / "run")

episodes = 60
print(f"rolling out {episodes} deterministic episodes with traces ...")
trace = root / "eval_trace.jsonl"
rate = rollout_episodes(cfg, root / "run", episodes=episodes, trace_path=trace)
print(f"success rate: {rate:.2f}")

window = 200  # maximal high-level action length at this configuration
result = analyze_interruptions([trace], window=window)
print(f"paired interruptions: {len(result.records)}, "
      f"orphans: {result.orphan_interruptions}, beyond window: {result.overflow}")
print(f"fraction within 100 steps of the event: {result.fraction_within(100):.2f}")

hist = result.histogram
if hist:
    print("delay histogram (10-step bins):")
    for lo in range(0, window, 10):
        count = sum(c for d, c in hist.items() if lo <= d < lo + 10)
        if count:
            print(f"  {lo:3d}-{lo + 9:3d}  {'#' * min(count, 60)} {count}")
