import os
from concurrent.futures import ThreadPoolExecutor


def max_workers() -> int:
    value = os.environ.get("FRINGELAB_THREADS")
    if value:
        return max(1, int(value))
    return min(8, os.cpu_count() or 1)


def pmap(fn, items):
    """Order-preserving map, threaded up to ``FRINGELAB_THREADS`` workers."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
