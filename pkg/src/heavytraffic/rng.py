"""Reproducible counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, *ids)`` through
``numpy.random.SeedSequence``, so any worker can rebuild any stream without
coordination and results never depend on scheduling.
"""

from __future__ import annotations

import numpy as np

# samples per stream; fixed so reports do not depend on the worker count
CHUNK = 8192


def stream(seed: int, *ids: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError("an explicit nonnegative integer seed is required")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(ss))


def chunks(n: int, size: int = CHUNK) -> list[tuple[int, int]]:
    """``[(chunk_index, chunk_size), ...]`` covering ``n`` samples."""
    out = []
    start, idx = 0, 0
    while start < n:
        m = min(size, n - start)
        out.append((idx, m))
        start += m
        idx += 1
    return out
