"""
Fluxonium spectrum.

Builds 4E_C n² + ½E_L φ² − E_J cos(φ − φ_ext) in the harmonic-oscillator eigenbasis of
its quadratic part and diagonalizes it. Energies enter in GHz (E/h); the returned spectrum
is angular (rad/ns) with ω_0 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from mistsim.core.exceptions import DiagonalizationError, ParameterError, ResonanceError
from mistsim.core.logging import get_logger
from mistsim.core.types import ComplexArray, RealArray
from mistsim.core.units import TWO_PI

logger = get_logger("spectrum")

MIN_HO_TRUNCATION = 20
HERMITICITY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class FluxoniumSpec:
    """
    Circuit parameters of a fluxonium qubit.

    Attributes:
        E_C: Charging energy E_C/h in GHz
        E_L: Inductive energy E_L/h in GHz
        E_J: Josephson energy E_J/h in GHz
        phi_ext: External flux 2πΦ_ext/Φ_0 in radians
        ho_truncation: Harmonic-oscillator basis size
    """

    E_C: float
    E_L: float
    E_J: float
    phi_ext: float = 0.0
    ho_truncation: int = 150

    def __post_init__(self) -> None:
        values = {"E_C": self.E_C, "E_L": self.E_L, "E_J": self.E_J, "phi_ext": self.phi_ext}
        for name, value in values.items():
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite", details={name: value})
        if self.E_C <= 0 or self.E_L <= 0:
            raise ParameterError(
                "E_C and E_L must be positive", details={"E_C": self.E_C, "E_L": self.E_L}
            )
        if self.E_J < 0:
            raise ParameterError("E_J must be non-negative", details={"E_J": self.E_J})
        if self.ho_truncation < MIN_HO_TRUNCATION:
            raise ParameterError(
                f"ho_truncation must be >= {MIN_HO_TRUNCATION}",
                details={"ho_truncation": self.ho_truncation},
            )

    @property
    def phi_zpf(self) -> float:
        return float((2.0 * self.E_C / self.E_L) ** 0.25)

    @property
    def n_zpf(self) -> float:
        return float((self.E_L / (32.0 * self.E_C)) ** 0.25)

    @property
    def plasma_frequency_ghz(self) -> float:
        """Level spacing √(8 E_C E_L) of the quadratic part."""
        return math.sqrt(8.0 * self.E_C * self.E_L)


@dataclass(frozen=True)
class QubitSpectrum:
    """
    Diagonalized qubit.

    Attributes:
        omega: Eigenfrequencies ω_j in rad/ns, nondecreasing, ω_0 = 0
        n_matrix: Charge matrix elements n_ij = <i|n|j> in the eigenbasis
    """

    omega: RealArray
    n_matrix: ComplexArray

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=float)
        n_matrix = np.asarray(self.n_matrix, dtype=complex)
        if omega.ndim != 1 or n_matrix.shape != (omega.size, omega.size):
            raise ParameterError(
                "n_matrix must be square with one row per level",
                details={"levels": omega.size, "n_shape": n_matrix.shape},
            )
        if not np.all(np.isfinite(omega)) or not np.all(np.isfinite(n_matrix)):
            raise ParameterError("spectrum contains non-finite values")
        if np.any(np.diff(omega) < 0):
            raise ParameterError("omega must be nondecreasing")
        if abs(omega[0]) > 1e-12 * max(1.0, float(np.max(np.abs(omega)))):
            raise ParameterError("omega must be shifted so that omega[0] = 0")
        scale = max(float(np.max(np.abs(n_matrix))), 1e-300)
        if np.max(np.abs(n_matrix - n_matrix.conj().T)) > HERMITICITY_TOLERANCE * scale:
            raise ParameterError("n_matrix must be Hermitian")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "n_matrix", n_matrix)

    @property
    def level_count(self) -> int:
        return int(self.omega.size)

    def transition(self, i: int, j: int) -> float:
        """ω_ij = ω_j − ω_i."""
        return float(self.omega[j] - self.omega[i])

    def transitions(self) -> RealArray:
        """Matrix of ω_ij = ω_j − ω_i."""
        return self.omega[np.newaxis, :] - self.omega[:, np.newaxis]

    def truncated(self, level_count: int) -> QubitSpectrum:
        if not 1 <= level_count <= self.level_count:
            raise ParameterError(
                "level_count out of range",
                details={"requested": level_count, "available": self.level_count},
            )
        return QubitSpectrum(
            omega=self.omega[:level_count].copy(),
            n_matrix=self.n_matrix[:level_count, :level_count].copy(),
        )

    def hamiltonian(self) -> ComplexArray:
        """H_q = Σ ω_j |j><j| in its own eigenbasis."""
        return np.diag(self.omega).astype(complex)


@dataclass(frozen=True)
class DispersiveLimit:
    """Two-level dispersive quantities ω_q, Δ = ω_q − ω_r and χ = g²/Δ."""

    omega_q: float
    delta: float
    chi_two_level: float


def _ladder(truncation: int) -> RealArray:
    return np.diag(np.sqrt(np.arange(1, truncation, dtype=float)), k=1)


def phase_and_charge_operators(spec: FluxoniumSpec) -> tuple[RealArray, ComplexArray]:
    """φ = φ_zpf(b + b†) and n = i n_zpf(b† − b) in the oscillator basis."""
    b = _ladder(spec.ho_truncation)
    phi = spec.phi_zpf * (b + b.T)
    n = 1j * spec.n_zpf * (b.T - b)
    return phi, n


def build_fluxonium_hamiltonian(spec: FluxoniumSpec) -> ComplexArray:
    """
    Fluxonium Hamiltonian in the oscillator basis, in GHz.

    The cosine is evaluated through the eigen-decomposition of φ, which is exact within
    the truncation: cos(φ − φ_ext) = V diag(cos(λ − φ_ext)) V†.
    """
    size = spec.ho_truncation
    phi, _ = phase_and_charge_operators(spec)
    quadratic = spec.plasma_frequency_ghz * np.diag(np.arange(size, dtype=float) + 0.5)

    try:
        eigvals, eigvecs = linalg.eigh(phi)
    except linalg.LinAlgError as e:
        raise DiagonalizationError("eigen-decomposition of phi failed") from e
    cosine = (eigvecs * np.cos(eigvals - spec.phi_ext)) @ eigvecs.T

    hamiltonian = (quadratic - spec.E_J * cosine).astype(complex)
    return 0.5 * (hamiltonian + hamiltonian.conj().T)


def _fix_phases(vectors: ComplexArray) -> ComplexArray:
    # largest-magnitude component of each column made real positive
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[np.newaxis, :]


def diagonalize(spec: FluxoniumSpec, level_count: int) -> QubitSpectrum:
    """
    Diagonalize the fluxonium and return its lowest ``level_count`` levels.

    Raises:
        ParameterError: level_count larger than ho_truncation / 4
        DiagonalizationError: LAPACK failure or non-finite eigenvalues
    """
    if level_count < 1 or level_count > spec.ho_truncation // 4:
        raise ParameterError(
            "level_count must satisfy 1 <= level_count <= ho_truncation / 4",
            details={"level_count": level_count, "ho_truncation": spec.ho_truncation},
        )

    hamiltonian = build_fluxonium_hamiltonian(spec)
    try:
        energies, vectors = linalg.eigh(hamiltonian, subset_by_index=[0, level_count - 1])
    except linalg.LinAlgError as e:
        raise DiagonalizationError("fluxonium diagonalization failed") from e
    if not np.all(np.isfinite(energies)):
        raise DiagonalizationError("fluxonium diagonalization returned non-finite energies")

    vectors = _fix_phases(vectors)
    _, n_operator = phase_and_charge_operators(spec)
    n_matrix = vectors.conj().T @ n_operator @ vectors
    n_matrix = 0.5 * (n_matrix + n_matrix.conj().T)

    omega = TWO_PI * (energies - energies[0])
    logger.debug(
        f"Diagonalized fluxonium: {level_count} levels, "
        f"omega/2pi = {np.round(energies - energies[0], 6).tolist()} GHz"
    )
    return QubitSpectrum(omega=omega, n_matrix=n_matrix)


def dispersive_limit(spectrum: QubitSpectrum, g: float, omega_r: float) -> DispersiveLimit:
    """ω_q = ω_1 − ω_0, Δ = ω_q − ω_r and χ = g²/Δ."""
    if spectrum.level_count < 2:
        raise ParameterError("dispersive limit needs at least two levels")
    omega_q = spectrum.transition(0, 1)
    delta = omega_q - omega_r
    if delta == 0.0:
        raise ResonanceError("qubit and resonator are exactly resonant", levels=(0, 1))
    return DispersiveLimit(omega_q=omega_q, delta=delta, chi_two_level=g**2 / delta)


def find_multiphoton_resonance(
    spectrum: QubitSpectrum, omega_r: float, k: int, g_level: int = 0
) -> tuple[int, float]:
    """
    Level closest to a k-photon resonance with ``g_level``.

    Returns:
        (j, ω_j − ω_g − k ω_r) for the j minimizing the absolute residual.
    """
    if k < 2:
        raise ParameterError("k must be >= 2", details={"k": k})
    if spectrum.level_count < k + 1:
        raise ParameterError(
            "spectrum has too few levels for this photon order",
            details={"levels": spectrum.level_count, "k": k},
        )
    residuals = spectrum.omega - spectrum.omega[g_level] - k * omega_r
    candidates = [j for j in range(spectrum.level_count) if j != g_level]
    best = min(candidates, key=lambda j: abs(residuals[j]))
    return best, float(residuals[best])
