#!/usr/bin/env python3
"""The two termination predicates and the threshold estimator.

Geometric: compare the state-projection velocities two timed subgoals imply.
Q-based: fire when the frozen-noise proposal's value beats the live action's
value by more than alpha times a running deviation of start values.
"""

import numpy as np

from eat_hrl.termination import QBasedStrategy, should_terminate_geom, should_terminate_q, update_q_stats

print("=== geometric predicate ===")
x_state = np.zeros(2)
current_target, current_budget = np.array([1.0, 0.0]), 10
cases = [
    ("same action", np.array([1.0, 0.0]), 10),
    ("same direction, twice as far", np.array([2.0, 0.0]), 10),
    ("same point, half the time", np.array([1.0, 0.0]), 5),
    ("orthogonal target", np.array([0.0, 1.0]), 10),
    ("opposite target", np.array([-1.0, 0.0]), 10),
]
for alpha in (0.5, 1.0, 2.0):
    print(f"alpha = {alpha}")
    for name, target, budget in cases:
        fired = should_terminate_geom(target, budget, current_target, current_budget, x_state, alpha)
        print(f"  {name:28s} -> {'TERMINATE' if fired else 'keep'}")

print()
print("=== Q-based predicate with the running deviation ===")
strategy = QBasedStrategy(alpha=0.5)
rng = np.random.default_rng(0)
for q in rng.normal(loc=-40.0, scale=3.0, size=5000):
    update_q_stats(strategy, float(q))
print(f"after 5000 action starts with std 3.0: delta_t = {strategy.delta:.3f}")
for gap in (0.5, 1.0, 2.0, 5.0):
    fired = should_terminate_q(-40.0 + gap, -40.0, strategy)
    print(f"  proposal better by {gap:4.1f} -> {'TERMINATE' if fired else 'keep'} "
          f"(threshold {strategy.alpha * strategy.delta:.3f})")
