"""Order-preserving map over fixed work chunks.

Chunk boundaries never depend on the worker count, and results come back in
chunk order, so any reduction done by the caller is identical for 1 or N
workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_WORKERS = "CIRCLESUM_WORKERS"


def default_workers() -> int:
    value = os.environ.get(ENV_WORKERS)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def split_range(start: int, stop: int, size: int) -> list[tuple[int, int]]:
    """Fixed contiguous half-open chunks of ``range(start, stop)``."""
    return [(a, min(a + size, stop)) for a in range(start, stop, size)]


def chunk(seq: Sequence[T], size: int) -> list[Sequence[T]]:
    return [seq[i:i + size] for i in range(0, len(seq), size)]
