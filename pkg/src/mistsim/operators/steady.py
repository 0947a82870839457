"""
Steady state of a Lindbladian by sparse LU on the vectorized Liouvillian.

One row of L vec(ρ) = 0 is replaced by the trace condition. The solve is repeated with a
different replaced row; disagreement between the two solutions means the kernel of L is not
one-dimensional.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import norm as sparse_norm
from scipy.sparse.linalg import splu

from mistsim.core.exceptions import BasisMismatchError, ParameterError, SteadyStateError
from mistsim.core.logging import get_logger
from mistsim.operators.labeled import DensityMatrix, LabeledOperator
from mistsim.operators.lindblad import CollapseList

logger = get_logger("operators.steady")

DEFAULT_STEADY_STATE_CAP = 512
UNIQUENESS_TOLERANCE = 1e-6


def vectorized_liouvillian(h: LabeledOperator, collapse: CollapseList) -> sparse.csc_array:
    """
    Column-stacking superoperator: vec(dρ/dt) = L vec(ρ).

    L = −i(I⊗H − Hᵀ⊗I) + Σ κ (L̄⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I)
    """
    d = h.dim
    eye = sparse.identity(d, dtype=complex, format="csr")
    hm = sparse.csr_array(h.matrix, dtype=complex)
    out = -1j * (sparse.kron(eye, hm) - sparse.kron(hm.T, eye))
    for rate, op in collapse:
        if op.dims != h.dims or op.basis_tag != h.basis_tag:
            raise BasisMismatchError(
                "collapse operator incompatible with Hamiltonian",
                expected=(h.dims, h.basis_tag.value),
                actual=(op.dims, op.basis_tag.value),
            )
        lm = sparse.csr_array(op.matrix, dtype=complex)
        ldl = lm.conj().T @ lm
        out = out + rate * (
            sparse.kron(lm.conj(), lm) - 0.5 * sparse.kron(eye, ldl) - 0.5 * sparse.kron(ldl.T, eye)
        )
    return sparse.csc_array(out)


def _solve_with_trace_row(liouvillian: sparse.csc_array, d: int, row: int) -> np.ndarray:
    size = d * d
    keep = np.ones(size)
    keep[row] = 0.0
    trace_indices = np.arange(d) * (d + 1)
    trace_row = sparse.csr_array(
        (np.ones(d, dtype=complex), (np.full(d, row), trace_indices)), shape=(size, size)
    )
    system = sparse.csc_array(sparse.diags_array(keep) @ liouvillian + trace_row)
    rhs = np.zeros(size, dtype=complex)
    rhs[row] = 1.0
    try:
        factor = splu(system)
    except RuntimeError as e:
        raise SteadyStateError(
            "Liouvillian factorization is singular", details={"replaced_row": row, "error": str(e)}
        ) from e
    solution = factor.solve(rhs)
    if not np.all(np.isfinite(solution)):
        raise SteadyStateError("non-finite steady-state solution", details={"replaced_row": row})
    return solution


def steady_state(
    h: LabeledOperator,
    collapse: CollapseList,
    cap: int = DEFAULT_STEADY_STATE_CAP,
    residual_tolerance: float = 1e-10,
) -> DensityMatrix:
    """
    Unique ρ with L ρ = 0 and Tr ρ = 1.

    Raises:
        ParameterError: Hilbert-space dimension above ``cap``
        SteadyStateError: singular system, non-unique kernel or residual above tolerance
    """
    d = h.dim
    if d > cap:
        raise ParameterError(
            "Hilbert-space dimension exceeds the steady-state cap",
            details={"dim": d, "cap": cap},
        )
    liouvillian = vectorized_liouvillian(h, collapse)

    first = _solve_with_trace_row(liouvillian, d, 0)
    if d > 1:
        second = _solve_with_trace_row(liouvillian, d, d * d - 1)
        mismatch = float(np.linalg.norm(first - second))
        if mismatch > UNIQUENESS_TOLERANCE * max(float(np.linalg.norm(first)), 1.0):
            raise SteadyStateError(
                "steady state is not unique", details={"solution_mismatch": mismatch}
            )

    residual = float(np.linalg.norm(liouvillian @ first))
    scale = float(sparse_norm(liouvillian, 1)) * max(float(np.linalg.norm(first)), 1.0)
    if residual > residual_tolerance * scale:
        raise SteadyStateError(
            "steady-state residual above tolerance",
            details={"residual": residual, "scale": scale},
        )

    rho = first.reshape((d, d), order="F")
    result = DensityMatrix(rho, h.dims, h.basis_tag).hermitized().normalized()
    logger.debug(f"Steady state solved: dim={d}, residual={residual:.2e}")
    return result
