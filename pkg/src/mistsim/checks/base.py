"""
Check base classes and chain.

Checks inspect a simulation point before it runs and report whether the approximations
behind it hold. They never raise; callers decide whether a failure is fatal.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from mistsim.spectrum.fluxonium import QubitSpectrum
    from mistsim.sw.params import ReducedParams


@dataclass
class CheckResult:
    """
    Result of a check.

    Attributes:
        passed: Whether the approximation holds at this point
        reason: Human-readable reason (especially on failure)
        check_name: Name of the check that produced this result
        metadata: Margins and other context
    """

    passed: bool
    reason: str | None = None
    check_name: str = ""
    metadata: dict[str, Any] | None = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class CheckContext:
    """
    Everything a check may look at. Fields a check needs but finds unset make it pass with
    a "not applicable" reason.
    """

    g: float = 0.0
    omega_r: float = 0.0
    omega_d: float = 0.0
    epsilon_d: float = 0.0
    kappa: float = 0.0
    spectrum: QubitSpectrum | None = None
    params: ReducedParams | None = None
    n_max: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict)


class Check(ABC):
    """A single validity condition."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Unique identifier for this check."""
        ...

    @abstractmethod
    def check(self, context: CheckContext) -> CheckResult: ...


@dataclass
class CheckReport:
    """Results of every check in a chain, in chain order."""

    results: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_rows(self) -> list[dict[str, Any]]:
        return [
            {"check": r.check_name, "passed": r.passed, "reason": r.reason or ""}
            for r in self.results
        ]


class CheckChain:
    """
    Checks evaluated together on one point.

    A failing check does not stop the ones after it.
    """

    def __init__(self, checks: Sequence[Check]) -> None:
        self._checks = list(checks)

    @property
    def names(self) -> list[str]:
        return [check.name for check in self._checks]

    def check_all(self, context: CheckContext) -> CheckReport:
        return CheckReport([check.check(context) for check in self._checks])
