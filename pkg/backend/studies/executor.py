"""studies/executor.py — Ordered worker pool for replicate tasks.

Tasks are pure functions of their own Seed labels, so the only contract the
pool must keep is ordering: results come back in task-index order and the
thread count has no effect on any value.  numpy releases the GIL inside its
kernels, which is where replicate tasks spend their time.

Usage
-----
    pool = ReplicateExecutor(threads=4)
    blocks = pool.map(run_block, block_specs, desc="conditional on weights")
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from tqdm import tqdm

from core.config import settings
from core.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Replicates per task.  Fixed, so block boundaries never depend on threads.
BLOCK_SIZE = 250


def blocks(total: int, size: int = BLOCK_SIZE) -> list[range]:
    """Split range(total) into consecutive ranges of at most *size*."""
    return [range(start, min(start + size, total)) for start in range(0, total, size)]


class ReplicateExecutor:
    """Runs fn over items, inline for threads == 1, else on a thread pool."""

    def __init__(self, threads: int | None = None, progress: bool | None = None) -> None:
        self.threads = settings.threads if threads is None else threads
        if self.threads < 1:
            raise InvalidArgumentError(f"threads must be >= 1, got {self.threads}")
        self.progress = settings.progress if progress is None else progress

    def map(self, fn: Callable[[T], R], items: Iterable[T], desc: str = "") -> list[R]:
        items = list(items)
        results: list[R] = []
        bar = tqdm(total=len(items), desc=desc, unit="task", disable=not self.progress, leave=False)
        try:
            if self.threads == 1 or len(items) <= 1:
                for item in items:
                    results.append(fn(item))
                    bar.update(1)
                return results

            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                # Executor.map yields in submission order regardless of completion order.
                for result in pool.map(fn, items):
                    results.append(result)
                    bar.update(1)
            return results
        finally:
            bar.close()


def default_executor() -> ReplicateExecutor:
    return ReplicateExecutor()
