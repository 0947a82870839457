"""
Exception hierarchy for mistsim.

All library exceptions inherit from MistSimError for easy catching. Every class carries
an ``exit_code`` used by the command-line front end.
"""

from __future__ import annotations

from typing import Any


class MistSimError(Exception):
    """
    Base exception for all mistsim errors.

    Catch this to handle any library-related exception.

    Example:
        >>> try:
        ...     steady_state(h, collapse)
        ... except MistSimError as e:
        ...     print(f"Simulation error: {e}")
    """

    exit_code: int = 3

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} | Details: {self.details}"
        return self.message


class ConfigurationError(MistSimError):
    """
    Configuration is missing or invalid.

    Raised when:
    - Environment variables hold unparsable values
    - Configuration values fail validation
    """

    exit_code = 2


class ScenarioError(MistSimError):
    """
    A scenario file could not be parsed or validated.

    Raised when:
    - The file is missing, empty or not valid JSON
    - A required field is missing or has the wrong type
    - An unknown key is present (strict mode)
    - A physical field violates its invariant

    The JSON path of the offending entry is kept in ``path``.
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        path: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.path = path

    def __str__(self) -> str:
        base = super().__str__()
        if self.path:
            return f"[{self.path}] {base}"
        return base


class ParameterError(MistSimError):
    """
    A physical or numerical input violates its precondition.

    Raised when:
    - Parameters are non-finite or out of range (E_C <= 0, ho_truncation < 20, ...)
    - A requested level count exceeds what the truncation supports
    - Time grids are not strictly increasing from zero
    """

    exit_code = 2


class NumericalError(MistSimError):
    """Base exception for numerical failures during a computation."""

    exit_code = 3


class DiagonalizationError(NumericalError):
    """Eigen-decomposition of a Hamiltonian failed."""

    pass


class BasisMismatchError(NumericalError):
    """
    Operators or states were combined across incompatible bases.

    Raised when:
    - Subsystem dimensions differ
    - basis_tag values differ (bare_lab vs dressed_rotating vs reduced_rotating)
    """

    def __init__(
        self,
        message: str,
        expected: Any = None,
        actual: Any = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.expected = expected
        self.actual = actual


class ResonanceError(NumericalError):
    """
    A perturbative denominator is (nearly) resonant.

    ``levels`` names the offending pair (i, j) or triple of qubit levels.
    """

    def __init__(
        self,
        message: str,
        levels: tuple[int, ...],
        ratio: float | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.levels = levels
        self.ratio = ratio

    def __str__(self) -> str:
        return f"[levels {self.levels}] {super().__str__()}"


class TruncationError(NumericalError):
    """
    A Hilbert-space or series truncation is too small for the requested computation.

    Example:
        >>> try:
        ...     build_reduced_system(params, n_max=20)
        ... except TruncationError as e:
        ...     print(f"Need n_max >= {e.required}")
    """

    def __init__(
        self,
        message: str,
        required: int,
        available: int,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.required = required
        self.available = available

    def __str__(self) -> str:
        return (
            f"{super().__str__()} (required {self.required}, available {self.available}; "
            f"increase the truncation to at least {self.required})"
        )


class StepInstabilityError(NumericalError):
    """The fixed-step integrator diverged (trace or norm drift beyond tolerance)."""

    def __init__(
        self,
        message: str,
        t: float,
        drift: float,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.t = t
        self.drift = drift


class SteadyStateError(NumericalError):
    """
    The Liouvillian null-space solve failed.

    Raised when:
    - The null space is degenerate (more than one steady state)
    - The sparse factorization is singular
    - The residual exceeds tolerance
    """

    pass


class ConvergenceError(NumericalError):
    """
    A series or iteration did not converge.

    Raised when:
    - A recurrence tail diverges (|d_k/b_k| >= 1 in the tail)
    - A transition rate comes out negative (series artifact)
    - Appending terms changes the result beyond tolerance
    """

    pass


class IntegrationError(NumericalError):
    """A trajectory lost its norm without a detectable jump."""

    pass
