"""
Conditional coherent amplitudes and displaced-Fock matrix elements.

In the frame displaced by α_g on |g> and α_h on |h>, the k-photon coupling becomes
A^(k) = D†(α_h) a^k D(α_g) = e^{iφ} D(β) (a + α_g)^k with β = α_g − α_h and
φ = Im(α_h* α_g). Its elements follow from the Laguerre form of <n|D(β)|m>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb, eval_genlaguerre, gammaln

from mistsim.core.exceptions import ParameterError, TruncationError
from mistsim.core.types import ComplexArray
from mistsim.sw.params import ReducedParams

_AMPLITUDE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ConditionalAmplitudes:
    """
    Coherent amplitudes the cavity settles to with the qubit in |g> or |h>.

    α_i = −ε_d / (χ̌_i − iκ/2), χ̌_i = χ_i + δ_a.
    """

    alpha_g: complex
    alpha_h: complex
    chi_check_g: float
    chi_check_h: float
    epsilon_d: float
    kappa: float

    def __post_init__(self) -> None:
        for alpha, chi in ((self.alpha_g, self.chi_check_g), (self.alpha_h, self.chi_check_h)):
            expected = -self.epsilon_d / (chi - 0.5j * self.kappa)
            if abs(alpha - expected) > _AMPLITUDE_TOLERANCE * max(abs(expected), 1.0):
                raise ParameterError(
                    "amplitude inconsistent with the closed form",
                    details={"alpha": alpha, "expected": expected},
                )

    @property
    def beta(self) -> complex:
        """α_g − α_h."""
        return self.alpha_g - self.alpha_h

    @property
    def phase(self) -> float:
        """Im(α_h* α_g)."""
        return float((self.alpha_h.conjugate() * self.alpha_g).imag)

    @property
    def max_photons(self) -> float:
        return max(abs(self.alpha_g) ** 2, abs(self.alpha_h) ** 2)


def conditional_amplitudes(params: ReducedParams) -> ConditionalAmplitudes:
    """
    Raises:
        ParameterError: κ ≤ 0
    """
    if params.kappa <= 0:
        raise ParameterError("conditional amplitudes need kappa > 0", details={"kappa": params.kappa})
    chi_g = params.chi_g + params.delta_a
    chi_h = params.chi_h + params.delta_a
    return ConditionalAmplitudes(
        alpha_g=complex(-params.epsilon_d / (chi_g - 0.5j * params.kappa)),
        alpha_h=complex(-params.epsilon_d / (chi_h - 0.5j * params.kappa)),
        chi_check_g=chi_g,
        chi_check_h=chi_h,
        epsilon_d=params.epsilon_d,
        kappa=params.kappa,
    )


def default_truncation(amplitudes: ConditionalAmplitudes) -> int:
    """max(60, ceil(6·max|α|² + 30))."""
    return max(60, math.ceil(6.0 * amplitudes.max_photons + 30.0))


def minimum_truncation(amplitudes: ConditionalAmplitudes) -> int:
    return math.ceil(4.0 * amplitudes.max_photons + 20.0)


def displaced_fock_element(n: int | np.ndarray, m: int | np.ndarray, beta: complex) -> ComplexArray:
    """
    <n|D(β)|m>, vectorized over n and m.

    n ≥ m: √(m!/n!) β^(n−m) e^{−|β|²/2} L_m^(n−m)(|β|²)
    n < m: √(n!/m!) (−β*)^(m−n) e^{−|β|²/2} L_n^(m−n)(|β|²)
    """
    n_arr, m_arr = np.broadcast_arrays(np.asarray(n, dtype=int), np.asarray(m, dtype=int))
    lower = np.minimum(n_arr, m_arr)
    upper = np.maximum(n_arr, m_arr)
    order = upper - lower
    x = abs(beta) ** 2

    if beta == 0:
        return np.where(n_arr == m_arr, 1.0 + 0.0j, 0.0 + 0.0j)

    log_mag = 0.5 * (gammaln(lower + 1) - gammaln(upper + 1)) + order * math.log(abs(beta)) - 0.5 * x
    laguerre = eval_genlaguerre(lower, order, x)
    angle = np.where(n_arr >= m_arr, order * np.angle(beta), order * np.angle(-np.conj(beta)))
    return np.exp(log_mag) * laguerre * np.exp(1j * angle)


@dataclass(frozen=True)
class DisplacedElements:
    """A^(k)_{n0} (``column``) and A^(k)_{0m} (``row``) for n, m < n_trunc."""

    column: ComplexArray
    row: ComplexArray
    k: int

    @property
    def n_trunc(self) -> int:
        return int(self.column.size)

    def as_map(self) -> dict[tuple[int, int], complex]:
        out = {(n, 0): complex(v) for n, v in enumerate(self.column)}
        out.update({(0, m): complex(v) for m, v in enumerate(self.row)})
        return out


def displaced_matrix_elements(
    amplitudes: ConditionalAmplitudes, k: int, n_trunc: int
) -> DisplacedElements:
    """
    Analytic A^(k) elements on the first row and column.

    Raises:
        TruncationError: n_trunc < 4·max|α|² + 20
    """
    if k < 1:
        raise ParameterError("photon order k must be >= 1", details={"k": k})
    required = minimum_truncation(amplitudes)
    if n_trunc < required:
        raise TruncationError(
            "series truncation too small for the conditional amplitudes",
            required=required,
            available=n_trunc,
        )
    beta = amplitudes.beta
    prefactor = np.exp(1j * amplitudes.phase)
    alpha_g = amplitudes.alpha_g
    index = np.arange(n_trunc)

    column = prefactor * alpha_g**k * displaced_fock_element(index, 0, beta)

    row = np.zeros(n_trunc, dtype=complex)
    for j in range(k + 1):
        valid = index >= j
        shifted = np.where(valid, index - j, 0)
        falling = np.exp(0.5 * (gammaln(index + 1) - gammaln(shifted + 1)))
        term = comb(k, j) * alpha_g ** (k - j) * falling * displaced_fock_element(0, shifted, beta)
        row += np.where(valid, term, 0.0)
    row *= prefactor

    return DisplacedElements(column=column, row=row, k=k)
