"""
Performance helpers for simulation runs
Stage timing and order-preserving parallel execution of sweep points
"""

import time
import functools
import concurrent.futures
from typing import List, Any, Callable, Optional
import logging

from config import Config

logger = logging.getLogger(__name__)


class PerformanceOptimizer:
    """Times stages and fans independent work out over worker processes"""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = Config.resolve_jobs(max_workers)
        self.timings = {}

    def time_function(self, func: Callable) -> Callable:
        """Decorator to time function execution"""
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            result = func(*args, **kwargs)
            elapsed = time.perf_counter() - start_time
            self.timings[func.__name__] = self.timings.get(func.__name__, 0.0) + elapsed
            logger.debug(f"{func.__name__} took {elapsed:.2f} seconds")
            return result
        return wrapper

    def parallel_map(self, func: Callable, items: List[Any], max_workers: Optional[int] = None) -> List[Any]:
        """
        Apply func to every item, results in input order

        Runs inline for one worker or one item, otherwise in a process pool.
        Exceptions from func propagate to the caller; wrap func if per-item
        failures must not abort the batch.
        """
        if not items:
            return []

        workers = min(Config.resolve_jobs(max_workers or self.max_workers), len(items))
        if workers <= 1:
            return [func(item) for item in items]

        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(func, items))

    def get_timings(self) -> dict:
        return dict(self.timings)


# Global performance optimizer instance
performance_optimizer = PerformanceOptimizer()

# Decorators for easy use
time_it = performance_optimizer.time_function


def fast_parallel_process(func: Callable, items: List[Any], max_workers: Optional[int] = None) -> List[Any]:
    """Quick access to ordered parallel processing"""
    return performance_optimizer.parallel_map(func, items, max_workers)
