"""Ordered fan-out of independent replicate jobs.

Results always come back in item order, so reductions are identical for any
worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

_CONTEXT: Any = None


def _init(context):
    global _CONTEXT
    _CONTEXT = context


def _call(args):
    fn, item = args
    return fn(_CONTEXT, item)


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)


def parallel_map(fn: Callable[[Any, Any], Any], items: Sequence, context: Any, jobs: int | None = None) -> list:
    """``[fn(context, item) for item in items]``, optionally across processes.

    ``context`` is shipped to each worker once; ``fn`` must be a module-level
    function.
    """
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(items) <= 1:
        return [fn(context, item) for item in items]
    chunk = max(1, len(items) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init, initargs=(context,)) as pool:
        return list(pool.map(_call, [(fn, it) for it in items], chunksize=chunk))
