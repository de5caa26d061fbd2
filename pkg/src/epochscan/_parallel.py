"""Order-preserving fan-out over worker processes."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def chunked(n: int, parts: int) -> list[range]:
    """Split ``range(n)`` into at most ``parts`` contiguous blocks."""
    parts = max(1, min(parts, n)) if n else 1
    size, extra = divmod(n, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        out.append(range(start, stop))
        start = stop
    return out


def ordered_map(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """``[func(x) for x in items]``, optionally across processes.

    Results come back in input order, so aggregates computed from them do not
    depend on ``workers``. ``func`` must be picklable when ``workers > 1``.
    """
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def flatten(blocks: Iterable[list[R]]) -> list[R]:
    return [x for block in blocks for x in block]
