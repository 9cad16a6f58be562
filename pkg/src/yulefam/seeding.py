"""Per-replicate seed substreams.

Replicate ``i`` of an experiment seeded with ``master`` always draws from
``stream_rng(master, i)``, whatever the execution order or worker count.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(master: int, index: int) -> int:
    """SplitMix64-style hash of ``(master, index)`` into a 64-bit seed."""
    z = (int(master) & MASK64) + ((int(index) + 1) * _GOLDEN & MASK64)
    return _finalize(_finalize(z & MASK64) ^ (int(index) & MASK64))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def stream_rng(master: int, index: int) -> np.random.Generator:
    return make_rng(mix64(master, index))
