"""Order-preserving map honoring the SIMPLEXCODE_THREADS cap."""

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers():
    raw = os.environ.get("SIMPLEXCODE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items):
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
