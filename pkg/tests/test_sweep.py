"""Tests for SweepRunner."""

import time

from mistsim.core.exceptions import ConvergenceError
from mistsim.sweep import SweepRunner


class TestSweepRunner:
    """Tests for the bounded-concurrency sweep runner."""

    def test_results_in_task_order(self) -> None:
        """Test that outcomes follow task order whatever the finishing order."""

        def task(i: int) -> int:
            time.sleep(0.01 * (5 - i))
            return i * i

        result = SweepRunner(concurrency=3).run([lambda i=i: task(i) for i in range(5)])

        assert result.total_count == 5
        assert result.success_count == 5
        assert result.values() == [0, 1, 4, 9, 16]
        assert [o.index for o in result.outcomes] == list(range(5))

    def test_failures_are_captured(self) -> None:
        """Test that a failing point is recorded without stopping the others."""

        def fail() -> int:
            raise ConvergenceError("tail diverges")

        result = SweepRunner().run([lambda: 1, fail, lambda: 3])

        assert result.failed_count == 1
        assert result.values() == [1, None, 3]
        failed = result.outcomes[1]
        assert not failed.success
        assert failed.error_type == "ConvergenceError"
        assert "tail diverges" in (failed.error or "")

    def test_concurrency_floor(self) -> None:
        """Test that concurrency is at least one."""
        assert SweepRunner(concurrency=0).concurrency == 1

    async def test_process_inside_running_loop(self) -> None:
        """Test the coroutine form used from async callers."""
        result = await SweepRunner(concurrency=2).process([lambda: "a", lambda: "b"], concurrency=1)

        assert result.values() == ["a", "b"]
