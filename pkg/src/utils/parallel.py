"""Order-preserving chunked thread pool."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def chunk_bounds(n: int, chunk_size: int) -> list[tuple[int, int]]:
    """Split range(n) into [start, stop) chunks. Depends only on n and chunk_size."""
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def map_chunks(
    fn: Callable[[int, int], T],
    n: int,
    chunk_size: int,
    threads: int = 1,
) -> list[T]:
    """Apply fn(start, stop) to every chunk and return results in chunk order.

    Chunk boundaries never depend on the thread count, so any computation
    that is a pure function of its chunk gives bit-identical results for
    every value of threads.
    """
    bounds = chunk_bounds(n, chunk_size)
    if threads <= 1 or len(bounds) <= 1:
        return [fn(start, stop) for start, stop in bounds]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, start, stop) for start, stop in bounds]
        return [f.result() for f in futures]
