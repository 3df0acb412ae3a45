"""Ordered fan-out of sampling chunks over worker processes."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .rng import chunks, stream


def map_ordered(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """``[fn(t) for t in tasks]``, optionally across processes; order is preserved."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def _run_chunk(task):
    sampler, seed, ids, size = task
    return np.asarray(sampler(stream(seed, *ids), size))


def sample_chunks(sampler: Callable, n: int, seed: int, ids: tuple = (), workers: int = 1) -> np.ndarray:
    """Draw ``n`` values as fixed-size chunks, chunk ``i`` from stream ``(seed, *ids, i)``.

    ``sampler(rng, size)`` must be picklable when ``workers > 1``.  The result
    does not depend on ``workers``.
    """
    tasks = [(sampler, seed, tuple(ids) + (ci,), m) for ci, m in chunks(n)]
    parts = map_ordered(_run_chunk, tasks, workers)
    return np.concatenate(parts) if parts else np.empty(0)
