"""Fixed-chunk thread map.

Work is always split into chunks of ``CHUNK`` items regardless of the worker
count, and results are concatenated in chunk order, so outputs do not depend
on how many threads ran them.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 2048

_threads = 1


def set_threads(n=None):
    """Set the worker count used by :func:`chunked_map` (None = all cores)."""
    global _threads
    _threads = max(1, int(n)) if n else (os.cpu_count() or 1)
    return _threads


def get_threads():
    return _threads


def chunked_map(fn, n, threads=None):
    """Call ``fn(start, stop)`` on fixed chunks of ``range(n)``; return the list
    of results in chunk order."""
    bounds = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    workers = threads or _threads
    if workers <= 1 or len(bounds) <= 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))


def concat(parts, axis=0):
    return np.concatenate(parts, axis=axis) if parts else np.zeros(0)
