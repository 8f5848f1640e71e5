"""Named random streams derived from one master seed.

A run owns a single 64-bit master seed; every consumer (environment resets,
policy initialization, exploration noise, relabel sampling, training batch
noise, evaluation) gets its own stream seed from a SplitMix64 mix of the
master with a stable label hash. The mapping is documented and will not
change between versions: equal (seed, label) pairs always produce equal
stream seeds.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seeds", "stream_rng", "STREAM_LABELS"]

_MASK = (1 << 64) - 1

STREAM_LABELS = (
    "environment",
    "policy-init",
    "exploration-noise",
    "relabel-sampling",
    "freeze-events",
)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _fnv1a64(label: str) -> int:
    h = 0xCBF29CE484222325
    for byte in label.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


def derive_seeds(master_seed: int, stream_label: str) -> int:
    """Stable 64-bit stream seed for (master seed, label)."""
    return _splitmix64((int(master_seed) & _MASK) ^ _fnv1a64(stream_label))


def stream_rng(master_seed: int, stream_label: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seeds(master_seed, stream_label)))
