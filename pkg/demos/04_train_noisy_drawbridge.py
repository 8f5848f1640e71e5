#!/usr/bin/env python3
"""A miniature training run on NoisyDrawbridge.

Trains EAT(geom) for a few thousand steps and prints the metric rows. This
is a smoke-scale budget; see the acceptance suite or the desk profile for
the budgets that actually separate the algorithms.
"""

import tempfile
import time
from pathlib import Path

from eat_hrl.harness import desk_profile, run_training

cfg = desk_profile("NoisyDrawbridge", "EAT(geom)", master_seed=0, total_env_steps=10_000)
cfg.eval_interval = 2_000
cfg.eval_episodes = 5

out = Path(tempfile.mkdtemp(prefix="eat_hrl_demo_"))
print(f"training EAT(geom) for {cfg.total_env_steps} steps (output in {out}) ...")
start = time.time()
metrics = run_training(cfg, out_dir=out)
print(f"done in {time.time() - start:.0f}s")
print(f"{'env_step':>9s} {'success':>8s} {'episodes':>9s} {'interrupts':>10s}")
for row in metrics.rows:
    print(f"{row['env_step']:9d} {row['success_rate']:8.2f} {row['episodes']:9d} {row['interruptions']:10d}")
print(f"files: {sorted(p.name for p in out.iterdir())}")
