#!/usr/bin/env python3
"""NoisyDrawbridge walkthrough: random opening times and the event log.

A full-thrust ship rushes the gate, gets pinned until the bridge has fully
opened (63 steps after the random opening start), then sails through.
"""

import numpy as np

from eat_hrl.envs import make_env

for seed in (1, 3, 4):
    env = make_env("NoisyDrawbridge")
    env.reset(seed)
    print(f"--- episode with seed {seed}: opening starts at t={env.t_open} ---")
    done = False
    while not done:
        out = env.step(np.array([1.0]))
        for ev in out.events:
            print(f"  t={ev.time:4d}  {ev.kind.value}  (ship at {out.observation[0]:.3f})")
        done = out.done
    print(f"  t={env.time:4d}  episode done, position {env.position:.3f}, "
          f"success={env.success(out.observation)}")
    print()
