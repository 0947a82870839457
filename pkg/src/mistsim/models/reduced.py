"""
Reduced two-level k-photon model in the rotating frame.

H_eff = δ_a a†a + (δ_g + χ_g a†a)|g><g| + (δ_h + χ_h a†a)|h><h|
        + g_eff (a†)^k |g><h| + h.c. + ε_d (a + a†)

with photon loss κ D[a]. Basis index 0 is |g>, 1 is |h>.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from mistsim.checks import CheckContext, PhotonTruncationCheck
from mistsim.core.events import NumericalEvent, NumericalEventType
from mistsim.core.exceptions import MistSimError, ParameterError, TruncationError
from mistsim.core.logging import get_logger
from mistsim.core.types import BasisTag, DressedLabel, RealArray, Regime, TimeSeries
from mistsim.core.units import angular_to_mhz
from mistsim.operators import (
    DEFAULT_DENSE_CUTOFF,
    DensityMatrix,
    LabeledOperator,
    StepperConfig,
    basis_state,
    destroy,
    evolve_density_matrix,
    make_time_grid,
    number,
    projector,
    steady_state,
    tensor,
)
from mistsim.operators.steady import DEFAULT_STEADY_STATE_CAP
from mistsim.rates import FitResult, fit_relaxation, initial_state_policy
from mistsim.sw.params import ReducedParams
from mistsim.sweep import SweepRunner

logger = get_logger("models.reduced")

MIN_N_MAX = 20
DEFAULT_N_MAX = 100
OBSERVABLE_NAMES = ("P_g", "P_h", "n_avg")


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Effective Hamiltonian and collapse operators on (2, n_max + 1)."""

    params: ReducedParams
    n_max: int
    h_eff: LabeledOperator
    collapse: list[tuple[float, LabeledOperator]]

    @property
    def dims(self) -> tuple[int, int]:
        return (2, self.n_max + 1)

    def observables(self) -> dict[str, LabeledOperator]:
        size = self.n_max + 1
        eye = np.eye(size, dtype=complex)
        tag = BasisTag.REDUCED_ROTATING
        return {
            "P_g": tensor(projector(2, 0), eye, basis_tag=tag),
            "P_h": tensor(projector(2, 1), eye, basis_tag=tag),
            "n_avg": tensor(np.eye(2, dtype=complex), number(size), basis_tag=tag),
        }

    def initial_state(self, label: DressedLabel | str) -> DensityMatrix:
        """|g,0> or |h,0>."""
        index = 0 if DressedLabel(label) == DressedLabel.G else 1
        psi = basis_state(self.dims, (index, 0), BasisTag.REDUCED_ROTATING)
        return DensityMatrix.from_state(psi)


@dataclass(frozen=True)
class ReducedObservables:
    """Dressed populations and photon number of one state."""

    P_g_dressed: float  # noqa: N815
    P_h_dressed: float  # noqa: N815
    n_avg_dressed: float

    @property
    def inversion(self) -> float:
        return self.P_h_dressed - self.P_g_dressed

    @property
    def regime(self) -> Regime:
        return Regime.classify(self.P_g_dressed, self.P_h_dressed)


def required_photon_truncation(params: ReducedParams) -> int | None:
    """max|α|² + 10·max|α| rounded up, or None when κ = 0."""
    result = PhotonTruncationCheck().check(CheckContext(params=params, n_max=0))
    if result.metadata is None or "required" not in result.metadata:
        return None
    return int(result.metadata["required"])


def build_reduced_system(
    params: ReducedParams,
    n_max: int = DEFAULT_N_MAX,
    dense_cutoff: int = DEFAULT_DENSE_CUTOFF,
) -> ReducedSystem:
    """
    Raises:
        ParameterError: n_max < 20
        TruncationError: n_max below the expected photon range of the driven cavity
    """
    if n_max < MIN_N_MAX:
        raise ParameterError("n_max must be at least 20", details={"n_max": n_max})
    if n_max < params.order_k:
        raise ParameterError("n_max must exceed the photon order", details={"n_max": n_max})
    required = required_photon_truncation(params)
    if required is not None and required > n_max:
        raise TruncationError(
            "photon truncation too small for the driven cavity", required=required, available=n_max
        )

    size = n_max + 1
    a = destroy(size)
    adag = a.conj().T
    photons = number(size)
    eye_c = np.eye(size, dtype=complex)
    pg, ph = projector(2, 0), projector(2, 1)
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><h|
    ladder_up = np.linalg.matrix_power(adag, params.order_k)

    matrix = (
        params.delta_a * np.kron(np.eye(2), photons)
        + np.kron(pg, params.delta_g * eye_c + params.chi_g * photons)
        + np.kron(ph, params.delta_h * eye_c + params.chi_h * photons)
        + params.g_eff * np.kron(lower, ladder_up)
        + np.conj(params.g_eff) * np.kron(lower.T, ladder_up.conj().T)
        + params.epsilon_d * np.kron(np.eye(2), a + adag)
    )
    tag = BasisTag.REDUCED_ROTATING
    h_eff = LabeledOperator.create(matrix, (2, size), tag, dense_cutoff)
    if not h_eff.is_hermitian(1e-10):
        raise ParameterError("reduced Hamiltonian is not Hermitian")
    loss = LabeledOperator.create(np.kron(np.eye(2), a), (2, size), tag, dense_cutoff)
    collapse = [(params.kappa, loss)]
    return ReducedSystem(params=params, n_max=n_max, h_eff=h_eff, collapse=collapse)


def evolve_reduced(
    system: ReducedSystem,
    rho0: DensityMatrix,
    t_grid: RealArray,
    stepper_config: StepperConfig | None = None,
    keep_snapshots: bool = False,
) -> TimeSeries:
    """Master-equation evolution recording P_g, P_h and n_avg at every grid time."""
    return evolve_density_matrix(
        rho0,
        system.h_eff,
        system.collapse,
        t_grid,
        stepper_config=stepper_config,
        observables=system.observables(),
        keep_snapshots=keep_snapshots,
    )


def observables_of(system: ReducedSystem, rho: DensityMatrix) -> ReducedObservables:
    values = {
        name: float(np.real((op.matrix @ rho.matrix).diagonal().sum()))
        for name, op in system.observables().items()
    }
    return ReducedObservables(values["P_g"], values["P_h"], values["n_avg"])


def steady_observables(
    system: ReducedSystem, cap: int = DEFAULT_STEADY_STATE_CAP
) -> ReducedObservables:
    return observables_of(system, steady_state(system.h_eff, system.collapse, cap=cap))


@dataclass(frozen=True)
class ScanPoint:
    """Steady-state values at one drive point; ``error`` is set when the solve failed."""

    epsilon_d: float
    delta_a: float
    observables: ReducedObservables | None = None
    n_max: int = DEFAULT_N_MAX
    error: str | None = None

    @property
    def regime(self) -> Regime | None:
        return None if self.observables is None else self.observables.regime

    def to_row(self) -> dict[str, object]:
        obs = self.observables
        nan = math.nan
        return {
            "epsilon_d_MHz": angular_to_mhz(self.epsilon_d),
            "delta_a_MHz": angular_to_mhz(self.delta_a),
            "Pg_ss": obs.P_g_dressed if obs else nan,
            "Ph_ss": obs.P_h_dressed if obs else nan,
            "navg_ss": obs.n_avg_dressed if obs else nan,
            "W_ss": obs.inversion if obs else nan,
            "regime": self.regime.value if self.regime else f"error: {self.error}",
        }


@dataclass
class ScanResult:
    """Scan points in grid order (epsilon major, delta_a minor)."""

    points: list[ScanPoint]
    events: list[NumericalEvent] = field(default_factory=list)

    def rows(self) -> list[dict[str, object]]:
        return [p.to_row() for p in self.points]

    @property
    def failed(self) -> list[ScanPoint]:
        return [p for p in self.points if p.error is not None]


def _scan_point(
    params: ReducedParams,
    n_max: int,
    cap: int,
    escalate: bool,
    dense_cutoff: int = DEFAULT_DENSE_CUTOFF,
) -> tuple[ScanPoint, list[NumericalEvent]]:
    events: list[NumericalEvent] = []
    size = n_max
    required = required_photon_truncation(params)
    if escalate and required is not None and required > size:
        limit = cap // 2 - 1
        if required > limit:
            raise TruncationError(
                "photon range exceeds the steady-state cap", required=required, available=limit
            )
        events.append(
            NumericalEvent(
                NumericalEventType.TRUNCATION_ESCALATED,
                f"n_max raised from {size} to {required}",
                data={"epsilon_d": params.epsilon_d, "n_max": required},
            )
        )
        size = required
    system = build_reduced_system(params, size, dense_cutoff)
    point = ScanPoint(
        epsilon_d=params.epsilon_d,
        delta_a=params.delta_a,
        observables=steady_observables(system, cap),
        n_max=size,
    )
    return point, events


def steady_scan(
    params_base: ReducedParams,
    epsilon_grid: Sequence[float],
    delta_a_grid: Sequence[float] | None = None,
    n_max: int = DEFAULT_N_MAX,
    runner: SweepRunner | None = None,
    cap: int = DEFAULT_STEADY_STATE_CAP,
    escalate: bool = True,
    dense_cutoff: int = DEFAULT_DENSE_CUTOFF,
) -> ScanResult:
    """
    Steady state at every (ε_d, δ_a) grid point. Failed points are annotated, not raised.

    Raises:
        ParameterError: empty grid
    """
    if len(epsilon_grid) == 0 or (delta_a_grid is not None and len(delta_a_grid) == 0):
        raise ParameterError("scan grids must be nonempty")
    deltas: list[float | None] = list(delta_a_grid) if delta_a_grid is not None else [None]
    grid = [(float(eps), d) for eps in epsilon_grid for d in deltas]
    point_params = [params_base.with_drive(epsilon_d=eps, delta_a=d) for eps, d in grid]

    runner = runner or SweepRunner()
    tasks = [
        (lambda p=p: _scan_point(p, n_max, cap, escalate, dense_cutoff)) for p in point_params
    ]
    result = runner.run(tasks)

    points: list[ScanPoint] = []
    events: list[NumericalEvent] = []
    for params, outcome in zip(point_params, result.outcomes, strict=True):
        if outcome.value is not None:
            point, point_events = outcome.value
            points.append(point)
            events.extend(point_events)
            continue
        points.append(
            ScanPoint(
                epsilon_d=params.epsilon_d,
                delta_a=params.delta_a,
                n_max=n_max,
                error=outcome.error,
            )
        )
        events.append(
            NumericalEvent(
                NumericalEventType.POINT_FAILED,
                outcome.error or "",
                data={"epsilon_d": params.epsilon_d, "error_type": outcome.error_type},
            )
        )
    logger.info(f"Steady scan finished: {len(points)} points, {result.failed_count} failed")
    return ScanResult(points=points, events=events)


def extract_relaxation(
    system: ReducedSystem,
    t_end_ns: float,
    stepper_config: StepperConfig | None = None,
    initial: DressedLabel | str | None = None,
) -> FitResult:
    """
    Run the master equation from the policy's initial state and fit the P_g relaxation.

    Raises:
        MistSimError: from the evolution or the fit window
    """
    label = DressedLabel(initial) if initial is not None else initial_state_policy(
        system.params.epsilon_d
    )
    config = stepper_config or StepperConfig()
    series = evolve_reduced(
        system, system.initial_state(label), make_time_grid(t_end_ns, config.dt_ns), config
    )
    try:
        return fit_relaxation(series, kappa=system.params.kappa)
    except MistSimError:
        logger.error(f"Relaxation fit failed at epsilon_d={system.params.epsilon_d:.4g}")
        raise
