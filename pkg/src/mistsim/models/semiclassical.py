"""
Semiclassical backaction model.

The resonator is a coherent amplitude α(t) driven by the qubit charge expectation; the qubit
follows H_sc(t) = H_q + 2g n Im α(t). Both run in the lab frame, so each output interval is
split into enough RK4 substeps to resolve the resonator and qubit oscillations.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from mistsim.core.events import NumericalEvent, NumericalEventType
from mistsim.core.exceptions import BasisMismatchError, ParameterError, StepInstabilityError
from mistsim.core.logging import get_logger
from mistsim.core.types import ComplexArray, RealArray, TimeSeries
from mistsim.models.full import FullSystem
from mistsim.operators import StateVector, StepperConfig
from mistsim.sweep import SweepResult, SweepRunner

logger = get_logger("models.semiclassical")

# (ψ, coherent α) is a product state
PRODUCT_STATE_NEGATIVITY = 0.0
NORM_RENORM_TOLERANCE = 1e-9
NORM_ABORT_TOLERANCE = 1e-4
# RK4 norm loss per substep grows as (phase per substep)^6
MAX_PHASE_PER_SUBSTEP = 0.05


@dataclass(frozen=True)
class SemiclassicalState:
    alpha: complex
    psi: ComplexArray
    t: float

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi, dtype=complex).ravel()
        if not np.all(np.isfinite(psi)) or not math.isfinite(abs(self.alpha)):
            raise ParameterError("semiclassical state contains non-finite values")
        object.__setattr__(self, "psi", psi)


class _Coupled:
    """Right-hand side on the packed vector [α, ψ_0, ..., ψ_{j-1}]."""

    def __init__(self, system: FullSystem, backaction: bool) -> None:
        qubit = system.spectrum.truncated(system.j_max)
        self.system = system
        self.omega = qubit.omega
        self.n_matrix = qubit.n_matrix
        self.backaction = backaction
        self.n_norm = float(np.abs(self.n_matrix).sum(axis=0).max())

    def __call__(self, t: float, y: ComplexArray) -> ComplexArray:
        s = self.system
        alpha, psi = y[0], y[1:]
        n_psi = self.n_matrix @ psi
        dalpha = -1j * s.omega_r * alpha - 2.0 * math.sin(s.omega_d * t) * s.epsilon_d
        dalpha -= 0.5 * s.kappa * alpha
        if self.backaction:
            dalpha += s.g * np.real(np.vdot(psi, n_psi))
        dpsi = -1j * (self.omega * psi + 2.0 * s.g * alpha.imag * n_psi)
        out = np.empty_like(y)
        out[0] = dalpha
        out[1:] = dpsi
        return out

    def bound(self, alpha: complex) -> float:
        s = self.system
        qubit = float(self.omega.max()) + 2.0 * s.g * self.n_norm * max(abs(alpha), 1.0)
        return max(s.omega_r, qubit) + 0.5 * s.kappa


def semiclassical_rhs(
    state: SemiclassicalState, system: FullSystem, backaction: bool = True
) -> tuple[complex, ComplexArray]:
    """(dα/dt, dψ/dt) at ``state``."""
    if state.psi.size != system.j_max:
        raise BasisMismatchError(
            "qubit state size differs from j_max", expected=system.j_max, actual=state.psi.size
        )
    y = np.concatenate(([state.alpha], state.psi)).astype(complex)
    dy = _Coupled(system, backaction)(state.t, y)
    return complex(dy[0]), dy[1:]


def _rk4(rhs: _Coupled, y: ComplexArray, t: float, h: float) -> ComplexArray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_semiclassical(
    system: FullSystem,
    psi0: StateVector | ComplexArray,
    alpha0: complex,
    t_grid: RealArray,
    stepper_config: StepperConfig | None = None,
    backaction: bool = True,
) -> TimeSeries:
    """
    Integrate the coupled (α, ψ) equations and sample P0..P{j_max-1} and n_avg = |α|².

    With ``backaction=False`` the resonator ignores the qubit and acts as a classical drive.

    Raises:
        ParameterError: malformed grid or unnormalized ψ
        StepInstabilityError: norm drift beyond 1e-4 or non-finite state
    """
    config = stepper_config or StepperConfig()
    amplitudes = psi0.amplitudes if isinstance(psi0, StateVector) else np.asarray(psi0)
    amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
    if amplitudes.size != system.j_max:
        raise BasisMismatchError(
            "qubit state size differs from j_max", expected=system.j_max, actual=amplitudes.size
        )
    if abs(np.linalg.norm(amplitudes) - 1.0) > 1e-9:
        raise ParameterError("initial qubit state must be normalized")
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ParameterError("t_grid must be strictly increasing from 0")

    rhs = _Coupled(system, backaction)
    max_phase = min(config.max_phase_per_step, MAX_PHASE_PER_SUBSTEP)
    y = np.concatenate(([complex(alpha0)], amplitudes)).astype(complex)
    levels = system.j_max
    samples = np.zeros((grid.size, levels + 1))
    events: list[NumericalEvent] = []

    def record(index: int) -> None:
        samples[index, :levels] = np.abs(y[1:]) ** 2
        samples[index, levels] = abs(y[0]) ** 2

    record(0)
    for index in range(1, grid.size):
        t0, t1 = float(grid[index - 1]), float(grid[index])
        span = t1 - t0
        substeps = max(
            1,
            math.ceil(span / config.dt_ns - 1e-9),
            math.ceil(span * rhs.bound(complex(y[0])) / max_phase),
        )
        h = span / substeps
        for s in range(substeps):
            y = _rk4(rhs, y, t0 + s * h, h)

        norm = float(np.linalg.norm(y[1:]))
        drift = abs(norm - 1.0)
        if not np.all(np.isfinite(y)) or drift > NORM_ABORT_TOLERANCE:
            raise StepInstabilityError(
                "semiclassical integration became unstable", t=t1, drift=drift
            )
        if drift > NORM_RENORM_TOLERANCE:
            y[1:] /= norm
            logger.info(f"Renormalized qubit state at t={t1:.3f} ns (drift {drift:.2e})")
            events.append(
                NumericalEvent(
                    NumericalEventType.NORM_RENORMALIZED,
                    "qubit norm drift above tolerance",
                    t_ns=t1,
                    data={"drift": drift},
                )
            )
        record(index)

    columns = {f"P{j}": samples[:, j] for j in range(levels)}
    columns["n_avg"] = samples[:, levels]
    return TimeSeries(t_ns=grid, columns=columns, events=events)


def evolve_semiclassical_sweep(
    system: FullSystem,
    epsilon_grid: Sequence[float],
    psi0: StateVector | ComplexArray,
    t_grid: RealArray,
    alpha0: complex = 0.0,
    stepper_config: StepperConfig | None = None,
    backaction: bool = True,
    runner: SweepRunner | None = None,
) -> SweepResult[TimeSeries]:
    """One semiclassical run per drive amplitude; failures are kept per point."""
    runner = runner or SweepRunner()
    tasks = [
        (
            lambda eps=eps: evolve_semiclassical(
                replace(system, epsilon_d=float(eps)),
                psi0,
                alpha0,
                t_grid,
                stepper_config=stepper_config,
                backaction=backaction,
            )
        )
        for eps in epsilon_grid
    ]
    return runner.run(tasks)
