import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(requested=None):
    """Worker count, capped by ``SPECTRAFLOW_THREADS`` when set."""
    cap = os.environ.get("SPECTRAFLOW_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def ordered_map(fn, items, threads=None):
    """Map ``fn`` over ``items`` concurrently; results keep input order."""
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
