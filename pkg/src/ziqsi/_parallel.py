"""Process-based map helper.

Work items are dispatched to forked workers and results are returned in
input order, so a parallel run produces exactly the same output as a
serial one.
"""

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor

THREADS_ENV = "ZIQSI_THREADS"


def default_threads():
    val = os.environ.get(THREADS_ENV)
    if val:
        try:
            return max(1, int(val))
        except ValueError:
            pass
    return 1


def parallel_map(fn, items, threads):
    items = list(items)
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(threads, len(items)),
                             mp_context=ctx) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))
