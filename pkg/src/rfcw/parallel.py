"""Process-pool fan-out for independent grid cells, capped by ``RFCW_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

SERIAL_BELOW = 8


def worker_count() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get("RFCW_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def pmap(fn, items: list, workers: int | None = None) -> list:
    """``[fn(*it) for it in items]``, in order, possibly across processes."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) < SERIAL_BELOW:
        return [fn(*it) for it in items]
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*items), chunksize=chunksize))
