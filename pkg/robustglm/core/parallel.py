"""Ordered worker pool shared by every embarrassingly parallel sweep.

Results always come back in input order, so outputs never depend on the
thread count. Callers derive any randomness from the task index, not from
the worker that happens to run it.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from types import TracebackType
from typing import TypeVar

from robustglm.core.config import get_settings

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    def __init__(self, threads: int | None = None) -> None:
        self.threads = max(1, threads or get_settings().threads)
        self._executor: ThreadPoolExecutor | None = None

    def __enter__(self) -> WorkerPool:
        if self.threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="robustglm")
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        # a pool that was never entered (or a single thread) maps inline
        if self._executor is None:
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))


# single-threaded default for library calls that were not handed a pool
inline_pool = WorkerPool(threads=1)
