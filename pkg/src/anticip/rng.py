"""Counter-based random streams addressed by (seed, stream index).

Philox is a counter-based generator, so a (seed, index) pair fully names a
stream: its output is platform-stable, reproducible, and independent of every
other index. Trial partitions can therefore run in any order, or concurrently,
without changing a single drawn value.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for stream `index` of the family keyed by `seed`."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
