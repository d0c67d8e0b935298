"""Order-stable worker pool.  Thread count never changes results."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "COREF_METER_THREADS"


def thread_count(requested: Optional[int] = None) -> int:
    if requested is None:
        raw = os.environ.get(ENV_THREADS, "")
        requested = int(raw) if raw.strip() else 1
    return max(1, int(requested))


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    """``list(map(fn, items))``, spread over a thread pool when threads > 1."""
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
