"""Output jobs run on one background worker, or inline in synchronous mode.

Jobs receive data that the caller no longer mutates (summary records, field
snapshots), so stepping continues while files are written. Failures are logged and
kept; they never stop the simulation.
"""

import logging
from collections.abc import Callable
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any

logger = logging.getLogger(__name__)


class OutputQueue:
    """Ordered output jobs on a single worker thread."""

    def __init__(self, synchronous: bool = False):
        self.synchronous = synchronous
        self.errors: list[str] = []
        self._executor = None if synchronous else ThreadPoolExecutor(max_workers=1, thread_name_prefix="output")
        self._pending: list[Future] = []

    def submit(self, job: Callable[..., Any], *args: Any, **kwargs: Any):
        if self._executor is None:
            self._run(job, *args, **kwargs)
            return
        self._pending.append(self._executor.submit(self._run, job, *args, **kwargs))

    def _run(self, job: Callable[..., Any], *args: Any, **kwargs: Any):
        try:
            job(*args, **kwargs)
        except OSError as error:
            name = getattr(job, "__name__", repr(job))
            message = f"{name} failed: {error}"
            logger.error("output %s", message)
            self.errors.append(message)

    def wait(self):
        """Block until every submitted job has finished."""
        for future in self._pending:
            future.result()
        self._pending.clear()

    def close(self):
        self.wait()
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "OutputQueue":
        return self

    def __exit__(self, *exc_info):
        self.close()
