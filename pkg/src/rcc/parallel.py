"""Order-preserving parallel map capped by the RCC_THREADS environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def workers() -> int:
    raw = os.environ.get("RCC_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(fn, items):
    """``[fn(x) for x in items]`` evaluated on up to ``workers()`` threads.

    Results come back in input order, so any reduction over them is
    independent of the worker count.
    """
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
