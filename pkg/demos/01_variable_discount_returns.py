#!/usr/bin/env python3
"""Variable-discount return arithmetic.

Shows why discounting over elapsed original time matters: a future event's
weight stays gamma^elapsed no matter how many higher-level actions span the
interval, so a policy cannot hide a catastrophe by slicing time differently.
"""

import numpy as np

from eat_hrl.core import discounted_return

rng = np.random.default_rng(0)

print("=== one fixed reward stream, many segmentations ===")
stream = np.full(200, -1.0)
stream[150] = -100.0  # the catastrophic event, 150 steps out
gamma = 0.99

whole = discounted_return(stream, gamma)
print(f"unpartitioned return: {whole:.6f}")

for n_actions in (2, 5, 20, 50):
    cuts = sorted(rng.choice(np.arange(1, 200), size=n_actions - 1, replace=False))
    total, offset = 0.0, 0
    for piece in np.split(stream, cuts):
        total += gamma**offset * discounted_return(piece, gamma)
        offset += len(piece)
    print(f"  split into {n_actions:3d} segments -> {total:.6f} (diff {abs(total - whole):.2e})")

print()
print("=== per-decision discounting, by contrast, is gameable ===")
# the same stream, but each segment pays its reward sum discounted per decision
for n_actions in (2, 5, 20, 50):
    edges = np.linspace(0, 200, n_actions + 1).astype(int)
    total = 0.0
    for k in range(n_actions):
        total += gamma**k * float(stream[edges[k] : edges[k + 1]].sum())
    print(f"  {n_actions:3d} equal actions -> per-decision return {total:10.3f}")
print("shorter actions push the -100 event into higher powers of gamma:")
print("the count of decisions, not elapsed time, sets the weight.")
