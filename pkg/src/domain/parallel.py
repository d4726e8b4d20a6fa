"""
Deterministic fan-out over worker threads.

Work is cut into chunks whose boundaries depend only on the problem size, and
results come back in chunk order, so output never depends on the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_CHUNK = 4096


def resolve_threads(threads: Optional[int] = None) -> int:
    return max(1, threads or 1)


def chunk_plan(total: int, chunk_size: int = DEFAULT_CHUNK) -> List[Tuple[int, int]]:
    """(chunk index, chunk length) pairs covering `total` items."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    plan = []
    for index, start in enumerate(range(0, total, chunk_size)):
        plan.append((index, min(chunk_size, total - start)))
    return plan


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """map() preserving input order; threads > 1 uses a thread pool."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Dispatching {len(items)} chunks to {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
