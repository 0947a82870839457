"""
Maps between the bare lab frame and the dressed (SW-transformed) frame.

The dressed frame is reached with e^{S}; a dressed state maps back to the lab as
|ψ_lab> = e^{−S}|ψ_dressed>, with S = S^(1) assembled on the truncated joint space.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from mistsim.core.exceptions import BasisMismatchError, ParameterError
from mistsim.core.logging import get_logger
from mistsim.core.types import BasisTag, ComplexArray
from mistsim.operators.labeled import DensityMatrix, StateVector
from mistsim.sw.algebra import NormalOrdered
from mistsim.sw.expansion import SWExpansion

logger = get_logger("sw.frames")

NORM_LOG_TOLERANCE = 1e-9


def joint_operator(components: NormalOrdered, photon_levels: int) -> ComplexArray:
    """Dense qubit ⊗ Fock matrix of a normal-ordered operator."""
    return components.joint_matrix(photon_levels)


def joint_h0(sw: SWExpansion, photon_levels: int) -> ComplexArray:
    """H_0 = H_q ⊗ 1 + ω_r 1 ⊗ a†a."""
    photons = np.diag(np.arange(photon_levels, dtype=float)).astype(complex)
    return np.kron(sw.spectrum.hamiltonian(), np.eye(photon_levels)) + sw.omega_r * np.kron(
        np.eye(sw.spectrum.level_count), photons
    )


def generator_residual(sw: SWExpansion, photon_levels: int = 12) -> float:
    """max |[S^(1), H_0] + V^(1)_od| on the truncated joint space."""
    s1 = joint_operator(sw.generators[1], photon_levels)
    v1 = sw.interactions[1] - sw.retained[1]
    h0 = joint_h0(sw, photon_levels)
    residual = s1 @ h0 - h0 @ s1 + joint_operator(v1, photon_levels)
    return float(np.max(np.abs(residual)))


def dressing_unitary(sw: SWExpansion, photon_levels: int, inverse: bool = False) -> ComplexArray:
    """e^{−S} (lab <- dressed), or e^{+S} with ``inverse``."""
    s1 = joint_operator(sw.generators[1], photon_levels)
    return linalg.expm(s1 if inverse else -s1)


def lab_frame_state(sw: SWExpansion, dressed_state: StateVector) -> StateVector:
    """
    e^{−S}|ψ> relabeled as a bare lab-frame state.

    Raises:
        BasisMismatchError: dims are not (qubit levels, photon levels) of this expansion
    """
    dims = dressed_state.dims
    if len(dims) != 2 or dims[0] != sw.spectrum.level_count:
        raise BasisMismatchError(
            "dressed state dims do not match the expansion",
            expected=(sw.spectrum.level_count, "photon_levels"),
            actual=dims,
        )
    if dressed_state.basis_tag != BasisTag.DRESSED_ROTATING:
        raise BasisMismatchError(
            "expected a dressed-frame state",
            expected=BasisTag.DRESSED_ROTATING.value,
            actual=dressed_state.basis_tag.value,
        )
    unitary = dressing_unitary(sw, dims[1])
    amplitudes = unitary @ dressed_state.amplitudes
    norm = float(np.linalg.norm(amplitudes))
    deviation = abs(norm - 1.0)
    if deviation > NORM_LOG_TOLERANCE:
        logger.info(f"Lab-frame mapping changed the norm by {deviation:.2e}; renormalizing")
    return StateVector(amplitudes / norm, dims, BasisTag.BARE_LAB, metadata={"norm_deviation": deviation})


def reduced_to_lab(
    sw: SWExpansion,
    rho: DensityMatrix,
    g_level: int,
    h_level: int,
    order_k: int,
    omega_d: float,
    t_ns: float,
) -> DensityMatrix:
    """
    Reduced-model density matrix -> bare lab-frame density matrix on (levels, photons).

    Embeds |g>, |h> into the full qubit space, undoes the rotating frame
    exp[−i(ω_d a†a + k ω_d |h><h|)t] and conjugates with e^{−S}.
    """
    if rho.basis_tag != BasisTag.REDUCED_ROTATING or len(rho.dims) != 2 or rho.dims[0] != 2:
        raise BasisMismatchError(
            "expected a reduced-model density matrix",
            expected=(BasisTag.REDUCED_ROTATING.value, 2),
            actual=(rho.basis_tag.value, rho.dims),
        )
    levels = sw.spectrum.level_count
    if not (0 <= g_level < levels and 0 <= h_level < levels):
        raise ParameterError("g_level/h_level outside the expansion spectrum")
    photons = rho.dims[1]

    isometry = np.zeros((levels, 2), dtype=complex)
    isometry[g_level, 0] = 1.0
    isometry[h_level, 1] = 1.0
    embed = np.kron(isometry, np.eye(photons))

    n = np.arange(photons, dtype=float)
    qubit_phase = np.zeros(2)
    qubit_phase[1] = order_k * omega_d
    phases = np.exp(-1j * t_ns * (omega_d * n[np.newaxis, :] + qubit_phase[:, np.newaxis]))
    rotated = rho.matrix * np.outer(phases.ravel(), phases.ravel().conj())

    unitary = dressing_unitary(sw, photons)
    lab = unitary @ (embed @ rotated @ embed.conj().T) @ unitary.conj().T
    return DensityMatrix(lab, (levels, photons), BasisTag.BARE_LAB).hermitized()
