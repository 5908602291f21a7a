"""Thread-count control for batch-parallel evaluation.

Work is only ever split along batch axes (independent outputs), never along
a reduction axis, so the thread count cannot change any result.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

ENV_VAR = "RIDGELAB_THREADS"
_override = None


def get_threads():
    """Worker count: explicit setting, else ``RIDGELAB_THREADS``, else 1."""
    if _override is not None:
        return _override
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError("%s must be a positive integer, got %r" % (ENV_VAR, raw))
        if n < 1:
            raise ValueError("%s must be a positive integer, got %r" % (ENV_VAR, raw))
        return n
    return 1


def set_threads(n):
    """Set the worker count for the process (``None`` restores the default)."""
    global _override
    if n is not None and int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _override = None if n is None else int(n)


@contextmanager
def threads(n):
    """Temporarily set the worker count."""
    global _override
    previous = _override
    set_threads(n)
    try:
        yield
    finally:
        _override = previous


def chunk_ranges(n, chunk):
    """Fixed ``[start, stop)`` ranges covering ``range(n)``."""
    chunk = max(1, int(chunk))
    return [(i, min(n, i + chunk)) for i in range(0, n, chunk)]


def chunked_map(fn, n, chunk):
    """Apply ``fn(start, stop)`` to fixed chunks of ``range(n)`` and return the list of results."""
    ranges = chunk_ranges(n, chunk)
    workers = min(get_threads(), len(ranges))
    if workers <= 1:
        return [fn(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))
