"""Qubit-resonator entanglement: partial transpose and negativity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from mistsim.core.exceptions import BasisMismatchError
from mistsim.core.types import NegativityConvention
from mistsim.operators import DensityMatrix, LabeledOperator

IDENTITY_TOLERANCE = 1e-9


def partial_transpose(rho: DensityMatrix, subsystem: int = 0) -> LabeledOperator:
    """
    Transpose the indices of one subsystem of a bipartite state.

    Raises:
        BasisMismatchError: state is not bipartite or ``subsystem`` is not 0 or 1
    """
    if len(rho.dims) != 2 or subsystem not in (0, 1):
        raise BasisMismatchError(
            "partial transpose needs a bipartite state", expected=2, actual=rho.dims
        )
    d0, d1 = rho.dims
    blocks = rho.matrix.reshape(d0, d1, d0, d1)
    swapped = blocks.transpose(2, 1, 0, 3) if subsystem == 0 else blocks.transpose(0, 3, 2, 1)
    return LabeledOperator(swapped.reshape(d0 * d1, d0 * d1), rho.dims, rho.basis_tag)


@dataclass(frozen=True)
class NegativityResult:
    """
    Attributes:
        trace_norm: ‖ρ^{T_q}‖₁ (≥ 1)
        negativity: Sum of |negative eigenvalues| of the partial transpose
        log_negativity: log₂ of the trace norm
    """

    trace_norm: float
    negativity: float
    log_negativity: float

    def value(self, convention: NegativityConvention) -> float:
        if convention is NegativityConvention.NEGATIVITY:
            return self.negativity
        return self.log_negativity


def negativity(rho: DensityMatrix, subsystem: int = 0) -> NegativityResult:
    """Negativity over the qubit subsystem (index 0 by default)."""
    transposed = partial_transpose(rho, subsystem).dense()
    eigenvalues = linalg.eigvalsh(0.5 * (transposed + transposed.conj().T))
    # Normalize by the trace so slightly unnormalized states keep trace_norm = 1 + 2N
    trace = float(np.sum(eigenvalues))
    eigenvalues = eigenvalues / trace
    neg = float(-np.sum(eigenvalues[eigenvalues < 0.0]))
    trace_norm = 1.0 + 2.0 * neg
    return NegativityResult(
        trace_norm=trace_norm,
        negativity=neg,
        log_negativity=math.log2(trace_norm),
    )
