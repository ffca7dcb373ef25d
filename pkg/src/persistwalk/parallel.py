"""Deterministic chunked execution over replicate ranges.

Replicates are cut into fixed-size chunks that do not depend on the worker
count; each chunk is processed independently and the per-chunk results are
returned in chunk order.  Combined with counter-based random numbers this
makes every reduction independent of how many threads ran it.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

CHUNK = 1 << 15


def default_workers() -> int:
    env = os.environ.get("PERSISTWALK_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def chunk_ranges(n: int, chunk: int = CHUNK) -> list:
    return [(a, min(a + chunk, n)) for a in range(0, n, chunk)]


def map_chunks(fn: Callable[[int, int], object], n: int, workers: Optional[int] = None,
               chunk: int = CHUNK) -> List[object]:
    """Apply ``fn(start, stop)`` to every chunk of ``range(n)``; results in chunk order."""
    ranges = chunk_ranges(n, chunk)
    workers = workers or default_workers()
    if workers <= 1 or len(ranges) <= 1:
        return [fn(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: fn(*ab), ranges))
