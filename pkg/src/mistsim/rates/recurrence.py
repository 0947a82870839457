"""
Recurrences for the adiabatically eliminated qubit coherence.

Both sequences obey b_n x_n + d_n x_{n+1} = y_n. The tail is solved backwards from
x_N = y_N / b_N, which is the truncation of the alternating series
x_n = Σ_{l≥n} (−1)^{l−n} (y_l/b_l) Π_{k=n}^{l−1} (d_k/b_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from mistsim.core.exceptions import ConvergenceError, ParameterError
from mistsim.core.types import ComplexArray
from mistsim.rates.amplitudes import ConditionalAmplitudes
from mistsim.sw.params import ReducedParams

C00Form = Literal["first_line", "printed_alternative"]

# number of trailing terms whose ratio |d/b| must stay below one
TAIL_WINDOW = 10


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """
    Coefficient sequences along the first column (n, 0) and first row (0, m).

    Attributes:
        c00_column: c^00_{n0}
        c00_row: c^00_{0m}
        c10: c^10_{n0} = κ(α_g* − α_h*)√(n+1)
        c01: c^01_{0m} = −κ(α_g − α_h)√(m+1)
        omega_q_tilde: Displaced-frame qubit detuning ω̃_q
        offset: Displaced-frame energy offset C (cancels from every rate)
    """

    c00_column: ComplexArray
    c00_row: ComplexArray
    c10: ComplexArray
    c01: ComplexArray
    omega_q_tilde: float
    offset: float
    kappa: float

    def c11(self, n: int | np.ndarray, m: int | np.ndarray) -> np.ndarray:
        """c^11_{nm} = κ√((n+1)(m+1))."""
        return self.kappa * np.sqrt((np.asarray(n) + 1.0) * (np.asarray(m) + 1.0))


def displaced_detuning(params: ReducedParams, amplitudes: ConditionalAmplitudes) -> float:
    """ω̃_q = δ_q + χ̌_h|α_h|² − χ̌_g|α_g|² + ε(α_h* − α_g*) + ε*(α_h − α_g)."""
    a_g, a_h, eps = amplitudes.alpha_g, amplitudes.alpha_h, params.epsilon_d
    value = (
        params.delta_q
        + amplitudes.chi_check_h * abs(a_h) ** 2
        - amplitudes.chi_check_g * abs(a_g) ** 2
        + eps * (a_h.conjugate() - a_g.conjugate())
        + eps * (a_h - a_g)
    )
    return float(value.real)


def energy_offset(params: ReducedParams, amplitudes: ConditionalAmplitudes) -> float:
    """C = ½(χ̌_h|α_h|² + χ̌_g|α_g|² + ε(α_h* + α_g*) + ε*(α_h + α_g))."""
    a_g, a_h, eps = amplitudes.alpha_g, amplitudes.alpha_h, params.epsilon_d
    value = 0.5 * (
        amplitudes.chi_check_h * abs(a_h) ** 2
        + amplitudes.chi_check_g * abs(a_g) ** 2
        + eps * (a_h.conjugate() + a_g.conjugate())
        + eps * (a_h + a_g)
    )
    return float(value.real)


def c00(
    n: np.ndarray,
    m: np.ndarray,
    params: ReducedParams,
    amplitudes: ConditionalAmplitudes,
    omega_q_tilde: float,
    form: C00Form = "first_line",
) -> ComplexArray:
    """c^00_{nm} in either of its two quoted forms."""
    kappa = params.kappa
    a_g, a_h = amplitudes.alpha_g, amplitudes.alpha_h
    chi_g, chi_h = amplitudes.chi_check_g, amplitudes.chi_check_h
    if form == "first_line":
        return (
            -1j * (chi_h * n - chi_g * m + omega_q_tilde)
            - 0.5 * kappa * (n + m)
            + kappa * (a_h * a_g.conjugate() - 0.5 * (abs(a_h) ** 2 + abs(a_g) ** 2))
        )
    if form == "printed_alternative":
        return (
            (-1j * chi_h - 0.5 * kappa) * n
            + (1j * chi_g - 0.5 * kappa) * m
            - 1j * (chi_h - chi_g) * a_g.conjugate() * a_h
            + params.delta_q
        )
    raise ParameterError("unknown c00 form", details={"form": form})


def recurrence_coefficients(
    params: ReducedParams,
    amplitudes: ConditionalAmplitudes,
    n_trunc: int,
    c00_form: C00Form = "first_line",
) -> RecurrenceCoefficients:
    index = np.arange(n_trunc, dtype=float)
    zeros = np.zeros(n_trunc)
    omega_q_tilde = displaced_detuning(params, amplitudes)
    kappa = params.kappa
    a_g, a_h = amplitudes.alpha_g, amplitudes.alpha_h
    return RecurrenceCoefficients(
        c00_column=c00(index, zeros, params, amplitudes, omega_q_tilde, c00_form),
        c00_row=c00(zeros, index, params, amplitudes, omega_q_tilde, c00_form),
        c10=kappa * (a_g.conjugate() - a_h.conjugate()) * np.sqrt(index + 1.0),
        c01=-kappa * (a_g - a_h) * np.sqrt(index + 1.0),
        omega_q_tilde=omega_q_tilde,
        offset=energy_offset(params, amplitudes),
        kappa=kappa,
    )


def solve_recurrence(
    y: ComplexArray, b: ComplexArray, d: ComplexArray, n_trunc: int | None = None
) -> ComplexArray:
    """
    Backward solution of b_n x_n + d_n x_{n+1} = y_n with x_{N} = y_{N}/b_{N}.

    Raises:
        ConvergenceError: |d_k/b_k| ≥ 1 in the last TAIL_WINDOW terms, or a vanishing b_k
    """
    size = len(y) if n_trunc is None else n_trunc
    y = np.asarray(y, dtype=complex)[:size]
    b = np.asarray(b, dtype=complex)[:size]
    d = np.asarray(d, dtype=complex)[:size]
    if not (y.size == b.size == d.size == size) or size < 1:
        raise ParameterError("recurrence sequences must share the truncation length")
    if np.any(b == 0):
        raise ConvergenceError(
            "recurrence has a vanishing diagonal coefficient",
            details={"index": int(np.argmax(b == 0))},
        )

    tail = np.abs(d[max(0, size - TAIL_WINDOW) :] / b[max(0, size - TAIL_WINDOW) :])
    if tail.size and float(np.max(tail)) >= 1.0:
        raise ConvergenceError(
            "recurrence tail diverges; increase the truncation",
            details={"max_tail_ratio": float(np.max(tail)), "n_trunc": size},
        )

    x = np.zeros(size, dtype=complex)
    x[-1] = y[-1] / b[-1]
    for n in range(size - 2, -1, -1):
        x[n] = (y[n] - d[n] * x[n + 1]) / b[n]
    if not np.all(np.isfinite(x)):
        raise ConvergenceError("recurrence produced non-finite values", details={"n_trunc": size})
    return x


def tail_ratio(b: ComplexArray, d: ComplexArray) -> float:
    """max |d/b| over the last TAIL_WINDOW entries."""
    window = slice(max(0, len(b) - TAIL_WINDOW), len(b))
    ratio = np.abs(np.asarray(d)[window] / np.asarray(b)[window])
    return float(np.max(ratio)) if ratio.size else math.nan
