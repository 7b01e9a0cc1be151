"""Ordered worker-pool mapping.

Results always come back in submission order, so reductions downstream
are byte-identical regardless of the worker count.  Threads (not
processes) are used: the heavy lifting inside tasks is numpy, which
releases the GIL for the expensive kernels.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return os.cpu_count() or 1


def map_ordered(fn, items, threads: int = 1):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
