"""Ordered parallel map for independent pairs and sweep rows."""

from concurrent.futures import ProcessPoolExecutor


def ordered_map(fn, items, jobs=1):
    """``[fn(x) for x in items]``, optionally spread over worker processes.

    Processes rather than threads: the mpmath precision context is global,
    so concurrent threads would change each other's working precision.
    ``fn`` must be picklable (a module-level function or a partial of one).
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
