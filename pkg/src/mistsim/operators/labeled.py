"""
Labeled operators and states.

Every operator and state carries its subsystem dimensions and a basis tag; algebra between
objects with different dims or tags raises BasisMismatchError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.special import gammaln

from mistsim.core.exceptions import BasisMismatchError, ParameterError
from mistsim.core.types import BasisTag, ComplexArray

Matrix: TypeAlias = "npt.NDArray[np.complex128] | sparse.csr_array"

DEFAULT_DENSE_CUTOFF = 512


def _as_storage(matrix: Matrix, dense_cutoff: int) -> Matrix:
    if sparse.issparse(matrix):
        if matrix.shape[0] <= dense_cutoff:
            return np.asarray(matrix.toarray(), dtype=complex)
        return sparse.csr_array(matrix, dtype=complex)
    array = np.asarray(matrix, dtype=complex)
    if array.shape[0] > dense_cutoff:
        return sparse.csr_array(array)
    return array


def _check_compatible(left: LabeledOperator | StateVector, right: LabeledOperator | StateVector) -> None:
    if left.dims != right.dims:
        raise BasisMismatchError("subsystem dims differ", expected=left.dims, actual=right.dims)
    if left.basis_tag != right.basis_tag:
        raise BasisMismatchError(
            "basis tags differ", expected=left.basis_tag.value, actual=right.basis_tag.value
        )


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """
    A square operator on a tensor-product space.

    Attributes:
        matrix: Dense ndarray up to the dense cutoff, CSR sparse array above it
        dims: Subsystem dimensions, e.g. (qubit_levels, n_max + 1)
        basis_tag: Basis the matrix is expressed in
    """

    matrix: Matrix
    dims: tuple[int, ...]
    basis_tag: BasisTag

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        size = math.prod(dims)
        if self.matrix.shape != (size, size):
            raise BasisMismatchError(
                "matrix shape does not match the product of dims",
                expected=(size, size),
                actual=self.matrix.shape,
            )
        object.__setattr__(self, "dims", dims)

    @classmethod
    def create(
        cls,
        matrix: Matrix,
        dims: tuple[int, ...] | list[int],
        basis_tag: BasisTag,
        dense_cutoff: int = DEFAULT_DENSE_CUTOFF,
    ) -> LabeledOperator:
        """Build with the storage policy: dense up to ``dense_cutoff``, sparse above."""
        return cls(_as_storage(matrix, dense_cutoff), tuple(dims), basis_tag)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.matrix)

    def dense(self) -> ComplexArray:
        if self.is_sparse:
            return np.asarray(self.matrix.toarray(), dtype=complex)
        return np.asarray(self.matrix)

    def dag(self) -> LabeledOperator:
        return LabeledOperator(self.matrix.conj().T, self.dims, self.basis_tag)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        dense = self.dense()
        scale = max(float(np.max(np.abs(dense))), 1.0)
        return bool(np.max(np.abs(dense - dense.conj().T)) <= tol * scale)

    def __add__(self, other: LabeledOperator) -> LabeledOperator:
        _check_compatible(self, other)
        return LabeledOperator(self.matrix + other.matrix, self.dims, self.basis_tag)

    def __sub__(self, other: LabeledOperator) -> LabeledOperator:
        _check_compatible(self, other)
        return LabeledOperator(self.matrix - other.matrix, self.dims, self.basis_tag)

    def __matmul__(self, other: LabeledOperator) -> LabeledOperator:
        _check_compatible(self, other)
        return LabeledOperator(self.matrix @ other.matrix, self.dims, self.basis_tag)

    def __mul__(self, scalar: complex) -> LabeledOperator:
        return LabeledOperator(self.matrix * scalar, self.dims, self.basis_tag)

    __rmul__ = __mul__

    def __neg__(self) -> LabeledOperator:
        return LabeledOperator(-self.matrix, self.dims, self.basis_tag)


@dataclass(frozen=True, eq=False)
class DensityMatrix(LabeledOperator):
    """A density matrix; always stored dense."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", np.asarray(self.dense(), dtype=complex))
        super().__post_init__()

    @cached_property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @classmethod
    def from_state(cls, psi: StateVector) -> DensityMatrix:
        amplitudes = psi.amplitudes
        return cls(np.outer(amplitudes, amplitudes.conj()), psi.dims, psi.basis_tag)

    def hermitized(self) -> DensityMatrix:
        return DensityMatrix(0.5 * (self.matrix + self.matrix.conj().T), self.dims, self.basis_tag)

    def normalized(self) -> DensityMatrix:
        return DensityMatrix(self.matrix / self.trace, self.dims, self.basis_tag)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class StateVector:
    """A pure state on a tensor-product space."""

    amplitudes: ComplexArray
    dims: tuple[int, ...]
    basis_tag: BasisTag
    metadata: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        dims = tuple(int(d) for d in self.dims)
        if amplitudes.size != math.prod(dims):
            raise BasisMismatchError(
                "amplitude count does not match the product of dims",
                expected=math.prod(dims),
                actual=amplitudes.size,
            )
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        norm = self.norm
        if norm == 0.0:
            raise ParameterError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / norm, self.dims, self.basis_tag)

    def apply(self, operator: LabeledOperator) -> StateVector:
        _check_compatible(operator, self)
        return StateVector(operator.matrix @ self.amplitudes, self.dims, self.basis_tag)


def destroy(size: int) -> ComplexArray:
    """Annihilation operator truncated to ``size`` Fock states."""
    return np.diag(np.sqrt(np.arange(1, size, dtype=float)), k=1).astype(complex)


def number(size: int) -> ComplexArray:
    return np.diag(np.arange(size, dtype=float)).astype(complex)


def projector(size: int, index: int) -> ComplexArray:
    out = np.zeros((size, size), dtype=complex)
    out[index, index] = 1.0
    return out


def embed(
    local: ComplexArray,
    position: int,
    dims: tuple[int, ...],
    basis_tag: BasisTag,
    dense_cutoff: int = DEFAULT_DENSE_CUTOFF,
) -> LabeledOperator:
    """Lift a single-subsystem operator onto the full tensor-product space."""
    factors = [sparse.identity(d, dtype=complex, format="csr") for d in dims]
    factors[position] = sparse.csr_array(local)
    full = factors[0]
    for factor in factors[1:]:
        full = sparse.kron(full, factor, format="csr")
    return LabeledOperator.create(full, dims, basis_tag, dense_cutoff)


def tensor(
    *locals_: ComplexArray,
    basis_tag: BasisTag,
    dense_cutoff: int = DEFAULT_DENSE_CUTOFF,
) -> LabeledOperator:
    """Kronecker product of single-subsystem operators."""
    dims = tuple(m.shape[0] for m in locals_)
    full = sparse.csr_array(locals_[0])
    for factor in locals_[1:]:
        full = sparse.kron(full, sparse.csr_array(factor), format="csr")
    return LabeledOperator.create(full, dims, basis_tag, dense_cutoff)


def basis_state(dims: tuple[int, ...], indices: tuple[int, ...], basis_tag: BasisTag) -> StateVector:
    """Product basis state |i_1, i_2, ...>."""
    if len(dims) != len(indices) or any(not 0 <= i < d for i, d in zip(indices, dims)):
        raise ParameterError("basis indices out of range", details={"dims": dims, "indices": indices})
    amplitudes = np.zeros(math.prod(dims), dtype=complex)
    amplitudes[np.ravel_multi_index(indices, dims)] = 1.0
    return StateVector(amplitudes, dims, basis_tag)


def coherent_amplitudes(size: int, alpha: complex) -> ComplexArray:
    """Fock amplitudes e^{-|α|²/2} α^n / √n! of a coherent state, renormalized on the truncation."""
    n = np.arange(size)
    if alpha == 0:
        out = np.zeros(size, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    out = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return out / np.linalg.norm(out)


def expectation(state: DensityMatrix | StateVector, observable: LabeledOperator) -> complex:
    """Tr(ρ O) or <ψ|O|ψ>."""
    _check_compatible(observable, state)
    if isinstance(state, StateVector):
        return complex(np.vdot(state.amplitudes, observable.matrix @ state.amplitudes))
    product = observable.matrix @ state.matrix
    return complex(product.diagonal().sum())


def partial_trace(rho: DensityMatrix, keep: int | tuple[int, ...]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``."""
    keep_tuple = (keep,) if isinstance(keep, int) else tuple(sorted(keep))
    dims = rho.dims
    if any(not 0 <= k < len(dims) for k in keep_tuple):
        raise BasisMismatchError("subsystem index out of range", expected=len(dims), actual=keep_tuple)

    count = len(dims)
    tensor_rho = rho.matrix.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:count])
    cols = list(letters[count : 2 * count])
    for axis in range(count):
        if axis not in keep_tuple:
            cols[axis] = rows[axis]
    out_spec = "".join(rows[k] for k in keep_tuple) + "".join(cols[k] for k in keep_tuple)
    reduced = np.einsum(f"{''.join(rows)}{''.join(cols)}->{out_spec}", tensor_rho)
    kept_dims = tuple(dims[k] for k in keep_tuple)
    size = math.prod(kept_dims)
    return DensityMatrix(reduced.reshape(size, size), kept_dims, rho.basis_tag)
