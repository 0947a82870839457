"""
Full driven qubit-resonator model and its quantum-jump unraveling.

H_full(t) = H_q + ω_r a†a + i g n (a† − a) − 2i ε_d sin(ω_d t)(a† − a)

Trajectories evolve under H_full(t) − iκ a†a/2. The drive is periodic, so the propagators
of the M substeps of one drive period are computed once (fourth-order commutator-free
Magnus) and reused for every period of every trajectory.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import expm_multiply

from mistsim.core.exceptions import BasisMismatchError, IntegrationError, ParameterError
from mistsim.core.logging import get_logger
from mistsim.core.types import BasisTag, ComplexArray, RealArray, TimeSeries
from mistsim.core.units import mhz_to_angular
from mistsim.operators import (
    DensityMatrix,
    LabeledOperator,
    StateVector,
    StepperConfig,
    destroy,
    evolve_density_matrix,
    number,
    projector,
    tensor,
)
from mistsim.spectrum.fluxonium import QubitSpectrum
from mistsim.sweep import SweepRunner

logger = get_logger("models.full")

DEFAULT_SUBSTEPS_PER_PERIOD = 64
DEFAULT_BISECTION_TOLERANCE = 1e-3
TRAJECTORY_POLICY_THRESHOLD_MHZ = 12.0
_SQRT3 = math.sqrt(3.0)
_GAUSS_NODES = (0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0)
_CF4_WEIGHTS = (0.25 + _SQRT3 / 6.0, 0.25 - _SQRT3 / 6.0)
_UNDERFLOW = 1e-300


@dataclass(frozen=True, eq=False)
class FullSystem:
    """
    Bare qubit-resonator system on (j_max, n_max + 1).

    Attributes:
        spectrum: Qubit spectrum; only its lowest j_max levels are used
        omega_r, omega_d, g, kappa, epsilon_d: Angular frequencies and rates (rad/ns)
        n_max: Photon truncation
        j_max: Qubit truncation
    """

    spectrum: QubitSpectrum
    omega_r: float
    omega_d: float
    g: float
    kappa: float
    epsilon_d: float
    n_max: int = 40
    j_max: int = 4

    def __post_init__(self) -> None:
        if self.j_max < 2 or self.j_max > self.spectrum.level_count:
            raise ParameterError(
                "j_max must be between 2 and the number of spectrum levels",
                details={"j_max": self.j_max, "levels": self.spectrum.level_count},
            )
        if self.n_max < 1:
            raise ParameterError("n_max must be positive", details={"n_max": self.n_max})
        if self.omega_d <= 0 or self.kappa < 0:
            raise ParameterError("omega_d must be positive and kappa non-negative")

    @property
    def dims(self) -> tuple[int, int]:
        return (self.j_max, self.n_max + 1)

    @property
    def dim(self) -> int:
        return self.j_max * (self.n_max + 1)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_d

    @cached_property
    def _pieces(self) -> dict[str, ComplexArray]:
        qubit = self.spectrum.truncated(self.j_max)
        size = self.n_max + 1
        a = destroy(size)
        eye_q = np.eye(self.j_max, dtype=complex)
        eye_c = np.eye(size, dtype=complex)
        quadrature = 1j * (a.conj().T - a)
        h_qr = (
            np.kron(qubit.hamiltonian(), eye_c)
            + self.omega_r * np.kron(eye_q, number(size))
            + self.g * np.kron(qubit.n_matrix, quadrature)
        )
        return {
            "h_qr": 0.5 * (h_qr + h_qr.conj().T),
            "drive": np.kron(eye_q, quadrature),
            "a": np.kron(eye_q, a),
            "photons": np.kron(eye_q, number(size)),
        }

    def drive_amplitude(self, t: float) -> float:
        """f(t) with H_d(t) = f(t)·i(a† − a)."""
        return -2.0 * self.epsilon_d * math.sin(self.omega_d * t)

    def matrix_at(self, t: float) -> ComplexArray:
        pieces = self._pieces
        return pieces["h_qr"] + self.drive_amplitude(t) * pieces["drive"]

    def non_hermitian_at(self, t: float) -> ComplexArray:
        return self.matrix_at(t) - 0.5j * self.kappa * self._pieces["photons"]

    def annihilation(self) -> ComplexArray:
        return self._pieces["a"]

    def collapse(self) -> list[tuple[float, LabeledOperator]]:
        return [(self.kappa, LabeledOperator.create(self.annihilation(), self.dims, BasisTag.BARE_LAB))]


def hamiltonian_at(system: FullSystem, t: float) -> LabeledOperator:
    """
    Raises:
        ParameterError: t < 0
    """
    if t < 0:
        raise ParameterError("t must be non-negative", details={"t": t})
    return LabeledOperator.create(system.matrix_at(t), system.dims, BasisTag.BARE_LAB)


def trajectory_policy(epsilon_d: float) -> int:
    """200 trajectories up to ε_d/2π = 12 MHz, 400 above."""
    return 200 if abs(epsilon_d) <= mhz_to_angular(TRAJECTORY_POLICY_THRESHOLD_MHZ) else 400


@dataclass(frozen=True)
class BareObservables:
    populations: RealArray
    n_avg: float


def bare_observables(state: DensityMatrix | StateVector) -> BareObservables:
    """
    Qubit level populations and ⟨a†a⟩ of a bare-basis state.

    Raises:
        BasisMismatchError: state not in the bare lab basis
    """
    if state.basis_tag != BasisTag.BARE_LAB or len(state.dims) != 2:
        raise BasisMismatchError(
            "bare observables need a bare_lab state on (qubit, photons); map dressed states first",
            expected=BasisTag.BARE_LAB.value,
            actual=state.basis_tag.value,
        )
    levels, photons = state.dims
    if isinstance(state, StateVector):
        weights = np.abs(state.amplitudes.reshape(levels, photons)) ** 2
    else:
        weights = np.real(np.diagonal(state.matrix)).reshape(levels, photons)
    weights = weights / weights.sum()
    return BareObservables(
        populations=weights.sum(axis=1),
        n_avg=float(weights.sum(axis=0) @ np.arange(photons)),
    )


@dataclass(frozen=True)
class JumpRecord:
    t_ns: float
    channel: int = 0


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """
    Averaged trajectory observables.

    ``series`` holds P0..P{j_max-1}, n_avg and stderr_Pg on the recording grid;
    ``samples`` has shape (trajectory_count, grid points, j_max + 1).
    """

    trajectory_count: int
    seed: int
    jumps: list[list[JumpRecord]]
    series: TimeSeries
    samples: np.ndarray = field(repr=False)


class _PeriodPropagators:
    """Magnus substep propagators over one drive period."""

    def __init__(self, system: FullSystem, substeps: int) -> None:
        self.substeps = substeps
        self.dt = system.period / substeps
        self.steps: list[ComplexArray] = []
        for k in range(substeps):
            t0 = k * self.dt
            h1 = system.non_hermitian_at(t0 + _GAUSS_NODES[0] * self.dt)
            h2 = system.non_hermitian_at(t0 + _GAUSS_NODES[1] * self.dt)
            w1, w2 = _CF4_WEIGHTS
            first = linalg.expm(-1j * self.dt * (w1 * h1 + w2 * h2))
            second = linalg.expm(-1j * self.dt * (w2 * h1 + w1 * h2))
            self.steps.append(second @ first)
        period = np.eye(system.dim, dtype=complex)
        for step in self.steps:
            period = step @ period
        self.period = period


class _Trajectory:
    """One quantum-jump trajectory on the precomputed substep grid."""

    def __init__(
        self,
        system: FullSystem,
        propagators: _PeriodPropagators,
        rng: np.random.Generator,
        bisection_tolerance: float,
    ) -> None:
        self._system = system
        self._props = propagators
        self._rng = rng
        self._tolerance = bisection_tolerance * propagators.dt
        self._a = system.annihilation()
        self.jumps: list[JumpRecord] = []

    def _partial(self, psi: ComplexArray, t0: float, tau: float) -> ComplexArray:
        if tau <= 0:
            return psi
        h_mid = self._system.non_hermitian_at(t0 + 0.5 * tau)
        return np.asarray(expm_multiply(-1j * tau * h_mid, psi))

    def _jump(self, psi: ComplexArray, t: float) -> ComplexArray:
        jumped = self._a @ psi
        norm = float(np.linalg.norm(jumped))
        if norm < _UNDERFLOW or not math.isfinite(norm):
            raise IntegrationError("jump produced a vanishing state", details={"t_ns": t})
        self.jumps.append(JumpRecord(t_ns=t))
        return jumped / norm

    def _finish_substep(
        self, psi: ComplexArray, t0: float, threshold: float
    ) -> tuple[ComplexArray, float]:
        """Integrate [t0, t0 + dt] resolving every jump inside it by bisection."""
        start, end = t0, t0 + self._props.dt
        while True:
            trial = self._partial(psi, start, end - start)
            if np.vdot(trial, trial).real > threshold:
                return trial, threshold
            low, high = 0.0, end - start
            while high - low > self._tolerance:
                mid = 0.5 * (low + high)
                midpoint_state = self._partial(psi, start, mid)
                if np.vdot(midpoint_state, midpoint_state).real > threshold:
                    low = mid
                else:
                    high = mid
            psi = self._jump(self._partial(psi, start, high), start + high)
            start += high
            threshold = float(self._rng.random())

    def run(
        self, psi0: ComplexArray, record_steps: Sequence[int]
    ) -> np.ndarray:
        props = self._props
        levels, photons = self._system.dims
        samples = np.zeros((len(record_steps), levels + 1))
        psi = psi0.copy()
        threshold = float(self._rng.random())
        step = 0

        def record(index: int, state: ComplexArray) -> None:
            weights = np.abs(state.reshape(levels, photons)) ** 2
            weights = weights / weights.sum()
            samples[index, :levels] = weights.sum(axis=1)
            samples[index, levels] = weights.sum(axis=0) @ np.arange(photons)

        for index, target in enumerate(record_steps):
            while step < target:
                if step % props.substeps == 0 and step + props.substeps <= target:
                    trial = props.period @ psi
                    if np.vdot(trial, trial).real > threshold:
                        psi = trial
                        step += props.substeps
                        continue
                trial = props.steps[step % props.substeps] @ psi
                if np.vdot(trial, trial).real > threshold:
                    psi = trial
                else:
                    psi, threshold = self._finish_substep(psi, step * props.dt, threshold)
                step += 1
                norm_sq = np.vdot(psi, psi).real
                if not math.isfinite(norm_sq) or norm_sq < _UNDERFLOW:
                    raise IntegrationError(
                        "trajectory norm underflow without a detected jump",
                        details={"t_ns": step * props.dt},
                    )
            record(index, psi)
        return samples


def monte_carlo_evolve(
    system: FullSystem,
    psi0: StateVector,
    t_grid: RealArray,
    trajectory_count: int,
    seed: int,
    substeps_per_period: int = DEFAULT_SUBSTEPS_PER_PERIOD,
    bisection_tolerance: float = DEFAULT_BISECTION_TOLERANCE,
    runner: SweepRunner | None = None,
) -> TrajectoryEnsemble:
    """
    Quantum-jump trajectories averaged on ``t_grid``.

    Observables are recorded at the substep nearest each grid time. Trajectory i draws from
    its own Philox stream spawned from ``seed``, and the average runs in trajectory order.

    Raises:
        ParameterError: bad grid, count, or unnormalized initial state
        BasisMismatchError: initial state not on the bare basis of the system
        IntegrationError: a trajectory loses its norm without a detectable jump
    """
    if trajectory_count < 1:
        raise ParameterError("trajectory_count must be positive")
    if psi0.dims != system.dims or psi0.basis_tag != BasisTag.BARE_LAB:
        raise BasisMismatchError(
            "initial state incompatible with the full system",
            expected=(system.dims, BasisTag.BARE_LAB.value),
            actual=(psi0.dims, psi0.basis_tag.value),
        )
    if abs(psi0.norm - 1.0) > 1e-9:
        raise ParameterError("initial state must be normalized", details={"norm": psi0.norm})
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ParameterError("t_grid must be strictly increasing from 0")

    propagators = _PeriodPropagators(system, substeps_per_period)
    record_steps = [int(round(t / propagators.dt)) for t in grid]
    children = np.random.SeedSequence(seed).spawn(trajectory_count)
    logger.info(
        f"Running {trajectory_count} trajectories on dim {system.dim}, "
        f"substep {propagators.dt * 1e3:.3f} ps"
    )

    def make_task(child: np.random.SeedSequence) -> _Trajectory:
        rng = np.random.Generator(np.random.Philox(child))
        return _Trajectory(system, propagators, rng, bisection_tolerance)

    trajectories = [make_task(child) for child in children]
    runner = runner or SweepRunner(concurrency=1)
    result = runner.run(
        [(lambda tr=tr: tr.run(psi0.amplitudes, record_steps)) for tr in trajectories]
    )
    failures = [o for o in result.outcomes if not o.success]
    if failures:
        raise IntegrationError(
            "trajectory integration failed",
            details={"trajectory": failures[0].index, "error": failures[0].error},
        )

    samples = np.stack([o.value for o in result.outcomes])
    mean = samples.mean(axis=0)
    if trajectory_count > 1:
        stderr = samples[:, :, 0].std(axis=0, ddof=1) / math.sqrt(trajectory_count)
    else:
        stderr = np.zeros(grid.size)
    columns = {f"P{j}": mean[:, j] for j in range(system.j_max)}
    columns["n_avg"] = mean[:, system.j_max]
    columns["stderr_Pg"] = stderr
    return TrajectoryEnsemble(
        trajectory_count=trajectory_count,
        seed=seed,
        jumps=[tr.jumps for tr in trajectories],
        series=TimeSeries(t_ns=grid, columns=columns),
        samples=samples,
    )


def master_equation_evolve(
    system: FullSystem,
    rho0: DensityMatrix,
    t_grid: RealArray,
    stepper_config: StepperConfig | None = None,
) -> TimeSeries:
    """Direct Lindblad evolution of the full model; the reference for trajectory averages."""
    size = system.n_max + 1
    tag = BasisTag.BARE_LAB
    observables: dict[str, LabeledOperator] = {
        f"P{j}": tensor(projector(system.j_max, j), np.eye(size, dtype=complex), basis_tag=tag)
        for j in range(system.j_max)
    }
    observables["n_avg"] = tensor(np.eye(system.j_max, dtype=complex), number(size), basis_tag=tag)
    return evolve_density_matrix(
        rho0,
        lambda t: hamiltonian_at(system, t),
        system.collapse(),
        t_grid,
        stepper_config=stepper_config,
        observables=observables,
    )
