"""Shared thread pool for fan-out work.

Grid verification chunks, closed-loop trajectory batches and Monte-Carlo
checks all run on the same lazily created pool. numpy and scipy release the
GIL inside their kernels, which is where these workloads spend their time.
"""
import logging
from typing import Callable, Iterable, List, Optional, TypeVar
from concurrent.futures import ThreadPoolExecutor

from polystab.config import get_runtime_settings

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

_executor: Optional[ThreadPoolExecutor] = None


def get_executor() -> ThreadPoolExecutor:
    """Get or create the shared thread pool executor."""
    global _executor
    if _executor is None:
        threads = get_runtime_settings().workers
        _executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix='polystab')
        logger.info(f"Initialized worker thread pool with {threads} threads")
    return _executor


def map_ordered(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Run ``func`` over ``items`` on the pool and return results in submission order.

    Args:
        func: Callable applied to each item. Must not mutate shared state.
        items: Work items.

    Returns:
        Results in the same order as ``items``, so merged reports are
        deterministic regardless of completion order.
    """
    items = list(items)
    if len(items) <= 1:
        return [func(item) for item in items]
    futures = [get_executor().submit(func, item) for item in items]
    return [future.result() for future in futures]


def shutdown_executor():
    global _executor
    if _executor is not None:
        _executor.shutdown(wait=True)
        _executor = None
