"""
Lindblad right-hand side and fixed-step RK4 evolution.

The right-hand side is evaluated by matrix products; the vectorized Liouvillian is only
built by the steady-state solver.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
from scipy import sparse

from mistsim.core.events import NumericalEvent, NumericalEventType
from mistsim.core.exceptions import BasisMismatchError, ParameterError, StepInstabilityError
from mistsim.core.logging import get_logger
from mistsim.core.types import ComplexArray, RealArray, TimeSeries
from mistsim.operators.labeled import DensityMatrix, LabeledOperator, Matrix

logger = get_logger("operators.lindblad")

CollapseList: TypeAlias = Sequence[tuple[float, LabeledOperator]]
HamiltonianLike: TypeAlias = "LabeledOperator | Callable[[float], LabeledOperator]"
Observable: TypeAlias = "LabeledOperator | Callable[[DensityMatrix], float]"

# Operators sparser than this are multiplied in CSR form inside the stepper
_SPARSE_PRODUCT_DENSITY = 0.1


@dataclass(frozen=True)
class StepperConfig:
    """
    Fixed-step RK4 settings.

    Attributes:
        dt_ns: Output grid step; each grid interval is integrated with a fixed number of
            RK4 substeps
        max_phase_per_step: Upper bound on (Liouvillian norm bound) x (substep), which fixes
            the substep count deterministically
        renorm_tolerance: Trace drift above which the state is renormalized (and logged)
        abort_tolerance: Trace drift above which the run aborts
    """

    dt_ns: float = 2.5
    max_phase_per_step: float = 1.0
    renorm_tolerance: float = 1e-7
    abort_tolerance: float = 1e-4

    def __post_init__(self) -> None:
        if self.dt_ns <= 0 or self.max_phase_per_step <= 0:
            raise ParameterError("dt_ns and max_phase_per_step must be positive")


def make_time_grid(t_end_ns: float, dt_ns: float = 2.5) -> RealArray:
    """Uniform grid 0, dt, 2dt, ... up to and including t_end."""
    if t_end_ns <= 0 or dt_ns <= 0:
        raise ParameterError("t_end_ns and dt_ns must be positive")
    count = int(math.floor(t_end_ns / dt_ns + 1e-9))
    return np.arange(count + 1, dtype=float) * dt_ns


def _check_grid(t_grid: RealArray) -> RealArray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ParameterError("t_grid must be strictly increasing from 0")
    return grid


def _for_products(matrix: Matrix) -> Matrix:
    if sparse.issparse(matrix):
        return sparse.csr_array(matrix)
    if np.count_nonzero(matrix) < _SPARSE_PRODUCT_DENSITY * matrix.size:
        return sparse.csr_array(matrix)
    return np.asarray(matrix)


def _right_multiply(rho: ComplexArray, op: Matrix) -> ComplexArray:
    """rho @ op, written so that a sparse op stays on the left of the product."""
    return np.asarray((op.T @ rho.T).T)


def norm_bound(matrix: Matrix) -> float:
    """Induced 1-norm (max absolute column sum), an upper bound on the spectral radius."""
    if sparse.issparse(matrix):
        return float(abs(matrix).sum(axis=0).max())
    return float(np.abs(matrix).sum(axis=0).max())


def _check_collapse(h: LabeledOperator, collapse: CollapseList) -> None:
    for rate, op in collapse:
        if rate < 0:
            raise ParameterError("collapse rates must be non-negative", details={"rate": rate})
        if op.dims != h.dims or op.basis_tag != h.basis_tag:
            raise BasisMismatchError(
                "collapse operator incompatible with Hamiltonian",
                expected=(h.dims, h.basis_tag.value),
                actual=(op.dims, op.basis_tag.value),
            )


def _effective_hamiltonian(h: Matrix, collapse: CollapseList) -> Matrix:
    """H − (i/2) Σ κ L†L."""
    out = h
    for rate, op in collapse:
        out = out - 0.5j * rate * (op.matrix.conj().T @ op.matrix)
    return out


def lindblad_rhs(h: LabeledOperator, collapse: CollapseList, rho: DensityMatrix) -> ComplexArray:
    """
    dρ/dt = −i[H, ρ] + Σ κ (L ρ L† − ½{L†L, ρ}).

    Raises:
        BasisMismatchError: dims or basis tags differ between H, ρ and collapse operators
    """
    if h.dims != rho.dims or h.basis_tag != rho.basis_tag:
        raise BasisMismatchError(
            "density matrix incompatible with Hamiltonian",
            expected=(h.dims, h.basis_tag.value),
            actual=(rho.dims, rho.basis_tag.value),
        )
    _check_collapse(h, collapse)
    h_eff = _effective_hamiltonian(h.matrix, collapse)
    jumps = [(rate, op.matrix) for rate, op in collapse]
    return _rhs(h_eff, jumps, rho.matrix)


def _rhs(h_eff: Matrix, jumps: list[tuple[float, Matrix]], rho: ComplexArray) -> ComplexArray:
    out = -1j * (np.asarray(h_eff @ rho) - _right_multiply(rho, h_eff.conj().T))
    for rate, op in jumps:
        out = out + rate * _right_multiply(np.asarray(op @ rho), op.conj().T)
    return out


class _Propagator:
    """RK4 stepping for a fixed (or sampled time-dependent) Lindbladian."""

    def __init__(self, h: HamiltonianLike, collapse: CollapseList) -> None:
        self._h = h
        self._jumps = [(rate, _for_products(op.matrix)) for rate, op in collapse]
        self._static = None
        if isinstance(h, LabeledOperator):
            self._static = _for_products(_effective_hamiltonian(h.matrix, collapse))
        self._collapse = collapse

    def h_eff(self, t: float) -> Matrix:
        if self._static is not None:
            return self._static
        assert callable(self._h)
        return _for_products(_effective_hamiltonian(self._h(t).matrix, self._collapse))

    def bound(self, t0: float, dt: float) -> float:
        dissipative = sum(rate * norm_bound(op) ** 2 for rate, op in self._jumps)
        if self._static is not None:
            return 2.0 * norm_bound(self._static) + dissipative
        samples = [t0 + dt * s / 8.0 for s in range(9)]
        return 2.0 * max(norm_bound(self.h_eff(t)) for t in samples) + dissipative

    def step(self, rho: ComplexArray, t: float, h: float) -> ComplexArray:
        k1 = _rhs(self.h_eff(t), self._jumps, rho)
        h_mid = self.h_eff(t + 0.5 * h)
        k2 = _rhs(h_mid, self._jumps, rho + 0.5 * h * k1)
        k3 = _rhs(h_mid, self._jumps, rho + 0.5 * h * k2)
        k4 = _rhs(self.h_eff(t + h), self._jumps, rho + h * k3)
        return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _evaluate(observable: Observable, rho: DensityMatrix) -> float:
    if isinstance(observable, LabeledOperator):
        return float(np.real((observable.matrix @ rho.matrix).diagonal().sum()))
    return float(observable(rho))


def evolve_density_matrix(
    rho0: DensityMatrix,
    h: HamiltonianLike,
    collapse: CollapseList,
    t_grid: RealArray,
    stepper_config: StepperConfig | None = None,
    observables: Mapping[str, Observable] | None = None,
    keep_snapshots: bool = False,
) -> TimeSeries:
    """
    Integrate the Lindblad equation with fixed-step RK4 and sample on ``t_grid``.

    Each grid interval Δ is split into max(ceil(Δ/dt), ceil(Δ·bound/max_phase)) equal
    substeps, where ``bound`` bounds the Liouvillian norm. The substep count depends only on
    the inputs, so repeated runs are bit-identical.

    Raises:
        ParameterError: malformed grid
        BasisMismatchError: incompatible operators
        StepInstabilityError: trace drift beyond ``abort_tolerance`` or non-finite state
    """
    config = stepper_config or StepperConfig()
    grid = _check_grid(t_grid)
    h_start = h if isinstance(h, LabeledOperator) else h(0.0)
    if h_start.dims != rho0.dims or h_start.basis_tag != rho0.basis_tag:
        raise BasisMismatchError(
            "initial state incompatible with Hamiltonian",
            expected=(h_start.dims, h_start.basis_tag.value),
            actual=(rho0.dims, rho0.basis_tag.value),
        )
    _check_collapse(h_start, collapse)

    propagator = _Propagator(h, collapse)
    observables = observables or {}
    columns: dict[str, list[float]] = {name: [] for name in observables}
    snapshots: list[ComplexArray] | None = [] if keep_snapshots else None
    events: list[NumericalEvent] = []

    rho = np.array(rho0.matrix, dtype=complex)
    bound = propagator.bound(0.0, float(grid[1]) if grid.size > 1 else config.dt_ns)

    def record(state: ComplexArray) -> None:
        current = DensityMatrix(state, rho0.dims, rho0.basis_tag)
        for name, observable in observables.items():
            columns[name].append(_evaluate(observable, current))
        if snapshots is not None:
            snapshots.append(state.copy())

    record(rho)
    for index in range(1, grid.size):
        t0, t1 = float(grid[index - 1]), float(grid[index])
        span = t1 - t0
        substeps = max(
            1,
            math.ceil(span / config.dt_ns - 1e-9),
            math.ceil(span * bound / config.max_phase_per_step),
        )
        step = span / substeps
        for s in range(substeps):
            rho = propagator.step(rho, t0 + s * step, step)

        rho = 0.5 * (rho + rho.conj().T)
        trace = float(np.real(np.trace(rho)))
        drift = abs(trace - 1.0)
        if not np.all(np.isfinite(rho)) or drift > config.abort_tolerance:
            raise StepInstabilityError(
                "density-matrix integration became unstable",
                t=t1,
                drift=drift,
                details={"substeps": substeps, "step_ns": step},
            )
        if drift > config.renorm_tolerance:
            rho = rho / trace
            logger.warning(f"Renormalized trace at t={t1:.3f} ns (drift {drift:.2e})")
            events.append(
                NumericalEvent(
                    NumericalEventType.TRACE_RENORMALIZED,
                    "trace drift above tolerance",
                    t_ns=t1,
                    data={"drift": drift},
                )
            )
        record(rho)

    return TimeSeries(
        t_ns=grid,
        columns={name: np.asarray(values) for name, values in columns.items()},
        snapshots=snapshots,
        events=events,
    )
