"""
Sweep runner.

Runs independent simulation points concurrently and gathers them in grid order.
"""

from __future__ import annotations

import asyncio
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Generic, TypeVar

from mistsim.core.logging import get_logger

T = TypeVar("T")


@dataclass
class SweepOutcome(Generic[T]):
    """Result of one sweep point; ``error`` holds the failure text when ``value`` is None."""

    index: int
    value: T | None = None
    error: str | None = None
    error_type: str | None = None

    @property
    def success(self) -> bool:
        return self.error is None


@dataclass
class SweepResult(Generic[T]):
    """Outcomes of a sweep, in task order."""

    total_count: int
    success_count: int
    failed_count: int
    outcomes: list[SweepOutcome[T]] = field(default_factory=list)

    def values(self) -> list[T | None]:
        return [o.value for o in self.outcomes]


class SweepRunner:
    """Bounded-concurrency runner for CPU-bound sweep points."""

    def __init__(self, concurrency: int = 4) -> None:
        self._concurrency = max(1, concurrency)
        self._logger = get_logger("sweep")

    @property
    def concurrency(self) -> int:
        return self._concurrency

    async def process(
        self,
        tasks: Sequence[Callable[[], T]],
        concurrency: int | None = None,
    ) -> SweepResult[T]:
        """Run every task in a worker thread, at most ``concurrency`` at a time."""
        sem = asyncio.Semaphore(concurrency or self._concurrency)

        async def _bounded(task: Callable[[], T]) -> T:
            async with sem:
                return await asyncio.to_thread(task)

        results: list[Any] = await asyncio.gather(
            *(_bounded(task) for task in tasks), return_exceptions=True
        )

        outcomes: list[SweepOutcome[T]] = []
        for i, res in enumerate(results):
            if isinstance(res, BaseException):
                if not isinstance(res, Exception):
                    raise res
                self._logger.warning(f"Sweep point {i} failed: {res}")
                outcomes.append(
                    SweepOutcome(index=i, error=str(res), error_type=type(res).__name__)
                )
            else:
                outcomes.append(SweepOutcome(index=i, value=res))

        success_count = sum(1 for o in outcomes if o.success)
        return SweepResult(
            total_count=len(outcomes),
            success_count=success_count,
            failed_count=len(outcomes) - success_count,
            outcomes=outcomes,
        )

    def run(
        self,
        tasks: Sequence[Callable[[], T]],
        concurrency: int | None = None,
    ) -> SweepResult[T]:
        """Synchronous entry point."""
        return asyncio.run(self.process(tasks, concurrency))
