"""Optional thread-level parallelism for independent per-element work."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker count from ``SKELSCORE_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get("SKELSCORE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SKELSCORE_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def map_ordered(func, items):
    """``list(map(func, items))``, spread over threads when allowed."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
