"""
Analytic transition rates between the dressed qubit states.

For |g_eff| ≪ κ the cavity relaxes to the conditional coherent states on a 1/κ timescale,
and the k-photon coupling induces the slow population exchange

    dP_g/dt = −γ_g P_g + γ_h P_h,   γ_i = −2|g_eff|² Re Σ_n A_i(n)* x^i_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mistsim.core.exceptions import ConvergenceError, ParameterError
from mistsim.core.logging import get_logger
from mistsim.core.types import ComplexArray, DressedLabel
from mistsim.core.units import mhz_to_angular
from mistsim.rates.amplitudes import (
    ConditionalAmplitudes,
    DisplacedElements,
    conditional_amplitudes,
    default_truncation,
    displaced_matrix_elements,
)
from mistsim.rates.recurrence import (
    C00Form,
    RecurrenceCoefficients,
    recurrence_coefficients,
    solve_recurrence,
)
from mistsim.sw.params import ReducedParams

logger = get_logger("rates")

CONVERGENCE_TOLERANCE = 1e-3
TAIL_EXTENSION = 10
MAX_ESCALATIONS = 6
# Negative rates smaller than this fraction of the total are roundoff
_ROUNDOFF = 1e-10
POLICY_THRESHOLD_MHZ = 7.0


@dataclass(frozen=True)
class RateWorkspace:
    """Intermediate quantities of one rate evaluation."""

    amplitudes: ConditionalAmplitudes
    elements: DisplacedElements
    coefficients: RecurrenceCoefficients
    x_g: ComplexArray
    x_h: ComplexArray
    n_trunc: int
    k: int

    @property
    def omega_q_tilde(self) -> float:
        return self.coefficients.omega_q_tilde

    @property
    def A_elems(self) -> dict[tuple[int, int], complex]:  # noqa: N802
        return self.elements.as_map()


@dataclass(frozen=True)
class RateResult:
    """
    Transition rates (1/ns) and the populations they relax to.

    ``degenerate`` marks g_eff = 0, where both rates vanish and the steady state is undefined.
    """

    gamma_g: float
    gamma_h: float
    gamma: float
    Pg_ss: float  # noqa: N815
    Ph_ss: float  # noqa: N815
    degenerate: bool = False
    n_trunc: int = 0
    workspace: RateWorkspace | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.degenerate and abs(self.gamma - (self.gamma_g + self.gamma_h)) > 1e-12 * max(
            abs(self.gamma), 1e-300
        ):
            raise ParameterError("gamma must equal gamma_g + gamma_h")


def _raw_rates(
    params: ReducedParams, n_trunc: int, c00_form: C00Form
) -> tuple[float, float, RateWorkspace]:
    amplitudes = conditional_amplitudes(params)
    elements = displaced_matrix_elements(amplitudes, params.order_k, n_trunc)
    coefficients = recurrence_coefficients(params, amplitudes, n_trunc, c00_form)
    x_g = solve_recurrence(elements.column, coefficients.c00_column, coefficients.c10)
    x_h = solve_recurrence(elements.row, coefficients.c00_row, coefficients.c01)
    weight = 2.0 * abs(params.g_eff) ** 2
    gamma_g = -weight * float(np.real(np.sum(np.conj(elements.column) * x_g)))
    gamma_h = -weight * float(np.real(np.sum(np.conj(elements.row) * x_h)))
    workspace = RateWorkspace(
        amplitudes=amplitudes,
        elements=elements,
        coefficients=coefficients,
        x_g=x_g,
        x_h=x_h,
        n_trunc=n_trunc,
        k=params.order_k,
    )
    return gamma_g, gamma_h, workspace


def transition_rates(
    params: ReducedParams,
    n_trunc: int | None = None,
    c00_form: C00Form = "first_line",
) -> RateResult:
    """
    Amplitudes -> displaced elements -> recurrences -> rates -> steady-state populations.

    The truncation is raised until appending TAIL_EXTENSION terms moves the rates by less
    than CONVERGENCE_TOLERANCE of γ.

    Raises:
        ConvergenceError: the series does not settle, or a rate is negative beyond roundoff
    """
    if params.g_eff == 0:
        logger.info("g_eff = 0: rates vanish and the steady state is undefined")
        return RateResult(
            gamma_g=0.0, gamma_h=0.0, gamma=0.0, Pg_ss=math.nan, Ph_ss=math.nan, degenerate=True
        )

    amplitudes = conditional_amplitudes(params)
    size = n_trunc if n_trunc is not None else default_truncation(amplitudes)

    for _ in range(MAX_ESCALATIONS):
        gamma_g, gamma_h, workspace = _raw_rates(params, size, c00_form)
        check_g, check_h, _ = _raw_rates(params, size + TAIL_EXTENSION, c00_form)
        total = abs(gamma_g) + abs(gamma_h)
        change = abs(check_g - gamma_g) + abs(check_h - gamma_h)
        if change <= CONVERGENCE_TOLERANCE * max(total, 1e-300):
            break
        logger.info(f"Rate series unconverged at n_trunc={size} (change {change:.2e}); extending")
        size = math.ceil(size * 1.5)
    else:
        raise ConvergenceError(
            "rate series did not converge; increase n_trunc",
            details={"n_trunc": size, "epsilon_d": params.epsilon_d},
        )

    total = gamma_g + gamma_h
    for name, value in (("gamma_g", gamma_g), ("gamma_h", gamma_h)):
        if value < -_ROUNDOFF * max(abs(total), 1e-300):
            raise ConvergenceError(
                f"{name} is negative; the series is not converged, increase n_trunc",
                details={name: value, "n_trunc": size},
            )
    gamma_g, gamma_h = max(gamma_g, 0.0), max(gamma_h, 0.0)
    gamma = gamma_g + gamma_h
    if gamma == 0.0:
        return RateResult(
            gamma_g=0.0,
            gamma_h=0.0,
            gamma=0.0,
            Pg_ss=math.nan,
            Ph_ss=math.nan,
            degenerate=True,
            n_trunc=size,
            workspace=workspace,
        )
    return RateResult(
        gamma_g=gamma_g,
        gamma_h=gamma_h,
        gamma=gamma,
        Pg_ss=gamma_h / gamma,
        Ph_ss=gamma_g / gamma,
        n_trunc=size,
        workspace=workspace,
    )


def population_estimate(
    rates: RateResult, t_ns: float | np.ndarray, initial: DressedLabel | str
) -> tuple[np.ndarray, np.ndarray]:
    """
    P_i(t) = P_i^ss + (P_i(0) − P_i^ss) e^{−γt} from a pure |g,0> or |h,0> start.

    A degenerate result keeps the initial populations.
    """
    label = DressedLabel(initial)
    t = np.asarray(t_ns, dtype=float)
    pg0 = 1.0 if label == DressedLabel.G else 0.0
    if rates.degenerate:
        pg = np.full_like(t, pg0)
        return pg, 1.0 - pg
    decay = np.exp(-rates.gamma * t)
    pg = rates.Pg_ss + (pg0 - rates.Pg_ss) * decay
    return pg, 1.0 - pg


def initial_state_policy(epsilon_d: float) -> DressedLabel:
    """Start in |h,0> up to ε_d/2π = 7 MHz and in |g,0> above, so the fitted amplitude is large."""
    if abs(epsilon_d) <= mhz_to_angular(POLICY_THRESHOLD_MHZ):
        return DressedLabel.H
    return DressedLabel.G
