"""Worker-count policy and an order-preserving parallel map."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "LOGITCOND_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Workers to use: ``requested`` if given, capped by LOGITCOND_THREADS."""
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            pass
    if requested is None:
        return limit
    return max(1, min(int(requested), limit))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]`` with results in input order regardless of scheduling."""
    items = list(items)
    w = worker_count(workers)
    if w <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))
