"""Order-preserving parallel map used by the sweeps.

Workers never share random state: every task derives its own generator
from the run seed and its index, and results come back in input order, so
reductions over them do not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("ENTWEB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"ENTWEB_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def pmap(fn, items, workers: int | None = None, chunksize: int = 8) -> list:
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=chunksize))
