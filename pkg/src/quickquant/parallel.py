"""Deterministic task execution, serial or process-parallel.

Tasks are (picklable) argument tuples for a module-level function.  Results
are always collected in task order, so a reduction over them is bitwise
independent of the worker count; see rng.UniformStream for how tasks get
their substreams.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence


def effective_workers(workers: int | None) -> int:
    if workers is None or workers <= 0:
        return 1
    return min(int(workers), os.cpu_count() or 1)


def run_tasks(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """Apply fn to each task, preserving task order in the result list."""
    workers = effective_workers(workers)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))
