"""
Parallel parameter sweeps
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

MAX_DEFAULT_WORKERS = 4


def default_workers() -> int:
    return max(1, min(MAX_DEFAULT_WORKERS, os.cpu_count() or 1))


def run_parallel(task: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None,
                 label: str = "sweep") -> List[R]:
    """Apply ``task`` to every item on a thread pool; results keep the input order.

    Each item must be independent of the others. The first exception raised
    by a task propagates after the pool shuts down.
    """
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    started = time.perf_counter()
    logger.debug(f"[SWEEP] {label}: {len(items)} items on {workers} workers")
    if workers == 1 or len(items) <= 1:
        results = [task(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="dispersia-sweep") as pool:
            results = list(pool.map(task, items))
    logger.info(f"[SWEEP] {label} finished {len(items)} items in {time.perf_counter() - started:.2f}s")
    return results
