"""Seeded randomness.

All randomness comes from numpy's Philox4x64-10 counter-based bit generator,
keyed directly by a 64-bit seed (no hashing of the key). Sub-seeds for the
trials of a sweep are derived with the SplitMix64 finalizer so that a single
integer recorded in the output reproduces a trial on its own.
"""

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 output function applied to ``x + gamma``."""
    z = (x + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, *indices: int) -> int:
    """Fold indices into a base seed: s <- splitmix64(s ^ splitmix64(i))."""
    s = splitmix64(base_seed & MASK64)
    for i in indices:
        s = splitmix64(s ^ splitmix64(i & MASK64))
    return s


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
