"""Worker-pool helper with order-preserving results."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "STRANDED_GRID_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else ``$STRANDED_GRID_THREADS``, else the CPU count."""
    if threads:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]`` evaluated on a thread pool.

    Results come back in input order whatever the completion order, so
    downstream aggregation is independent of scheduling.
    """
    items = list(items)
    n = min(resolve_threads(threads), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
