"""Ordered task execution on a fixed-size process pool.

Results always come back in task order, so anything aggregated from them is
independent of completion order and of the number of workers.
"""

from __future__ import annotations

import logging
import signal
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from typing import Callable, Sequence

log = logging.getLogger(__name__)


class WorkerFailure(RuntimeError):
    """A batch of tasks failed twice."""


def _ignore_sigint() -> None:
    # The coordinator owns interrupt handling; workers just finish their task.
    signal.signal(signal.SIGINT, signal.SIG_IGN)


class WorkerPool:
    def __init__(self, workers: int = 1) -> None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = workers
        self._executor: ProcessPoolExecutor | None = None

    def _pool(self) -> ProcessPoolExecutor:
        if self._executor is None:
            self._executor = ProcessPoolExecutor(self.workers, initializer=_ignore_sigint)
        return self._executor

    def _run(self, fn: Callable, tasks: Sequence) -> list:
        if self.workers == 1:
            return [fn(t) for t in tasks]
        return list(self._pool().map(fn, tasks))

    def map(self, fn: Callable, tasks: Sequence) -> list:
        """Apply ``fn`` to every task; one retry with a fresh pool on failure."""
        try:
            return self._run(fn, tasks)
        except (BrokenProcessPool, OSError, MemoryError) as exc:
            log.warning("worker failure (%s); retrying the batch once", exc)
            self.close()
            try:
                return self._run(fn, tasks)
            except Exception as again:  # noqa: BLE001
                raise WorkerFailure(f"rollout batch failed twice: {again}") from again

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
