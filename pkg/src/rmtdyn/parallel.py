"""Chunked sample-parallel execution.

Work is cut into fixed-size chunks of sample indices and chunk ``c`` always
draws from ``rng.child(c)``; the thread count only changes which worker
runs a chunk, never its random numbers, so results are identical for any
number of threads.
"""
import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["THREADS_ENV", "default_threads", "chunk_bounds", "map_chunks"]

THREADS_ENV = "RMTDYN_THREADS"


def default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def chunk_bounds(n_items, chunk_size):
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    return [(lo, min(lo + chunk_size, n_items)) for lo in range(0, n_items, chunk_size)]


def map_chunks(func, n_items, chunk_size, threads=None):
    """Call ``func(chunk_index, start, stop)`` for every chunk, in order.

    Returns the list of results ordered by chunk index.
    """
    bounds = chunk_bounds(n_items, chunk_size)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(bounds) <= 1:
        return [func(c, lo, hi) for c, (lo, hi) in enumerate(bounds)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(func, c, lo, hi) for c, (lo, hi) in enumerate(bounds)]
        return [f.result() for f in futures]
