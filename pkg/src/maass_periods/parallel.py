"""Worker-count setting shared by the sampling loops."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

_THREADS = 1


def set_threads(n: int) -> None:
    global _THREADS
    if n < 1:
        raise ValueError("thread count must be at least 1")
    _THREADS = int(n)


def get_threads() -> int:
    return _THREADS


def pmap(fn, items) -> list:
    """``[fn(x) for x in items]``, fanned out over the configured number of threads; order preserved."""
    items = list(items)
    if _THREADS == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_THREADS) as ex:
        return list(ex.map(fn, items))
