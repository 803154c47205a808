"""Fork-join map over independent replicas with results ordered by index."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return os.cpu_count() or 1


def indexed_map(fn, count: int, threads: int | None = None) -> list:
    """``[fn(0), ..., fn(count-1)]``, evaluated on up to ``threads`` workers.

    Each call must depend only on its index, so the list is identical for
    every thread count.  The compiled kernels release the GIL.
    """
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads == 1 or count <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=min(threads, count)) as pool:
        return list(pool.map(fn, range(count)))
