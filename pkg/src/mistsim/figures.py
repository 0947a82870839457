"""
Scenario-driven pipelines behind the command-line subcommands and figures.

A :class:`FigurePipeline` resolves the device (spectrum, resonance level, reduced
parameters) from a scenario once and writes every table through the same CSV writer, so two
runs with the same scenario and seed produce identical files. Sweep points run through the
shared :class:`SweepRunner`; results are collected in grid order before anything is written.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from mistsim.checks import CheckContext, default_chain
from mistsim.core.config import Config
from mistsim.core.events import NumericalEvent
from mistsim.core.exceptions import ConvergenceError, MistSimError, ParameterError
from mistsim.core.logging import get_logger
from mistsim.core.types import (
    BasisTag,
    DressedLabel,
    FigureName,
    ModelKind,
    TimeSeries,
)
from mistsim.core.units import (
    angular_to_ghz,
    angular_to_mhz,
    mhz_to_angular,
    per_ns_to_per_us,
    us_to_ns,
)
from mistsim.entanglement import negativity
from mistsim.models import (
    FullSystem,
    build_reduced_system,
    evolve_reduced,
    evolve_semiclassical,
    extract_relaxation,
    monte_carlo_evolve,
    steady_scan,
    trajectory_policy,
)
from mistsim.operators import DensityMatrix, StateVector, StepperConfig, basis_state, make_time_grid
from mistsim.output import dump_snapshot, frame_from_series, render_csv, write_json, write_table
from mistsim.rates import initial_state_policy, population_estimate, transition_rates
from mistsim.scenario import Scenario
from mistsim.spectrum import QubitSpectrum, diagonalize, find_multiphoton_resonance
from mistsim.sw import (
    ReducedParams,
    SWExpansion,
    converge_level_count,
    expand,
    lab_frame_state,
    reduced_to_lab,
    rwa_validity_report,
    second_order_params,
    third_order_params,
)
from mistsim.sweep import SweepRunner

logger = get_logger("figures")

FIG3_EPSILON_MHZ = 12.0
ESTIMATE_TIME_US = 1.0
READOUT_WINDOW_GROUND = 0.95
READOUT_WINDOW_PHOTONS = 15.0
TRACKING_TIMES_US = (0.5, 1.0, 2.0)
DEFAULT_DELTA_A_MHZ = (-10.0, 10.0, 9)

# Desk-scale caps; --paper-scale lifts them
DESK_FULL_N_MAX = 40
DESK_TRAJECTORIES = 100
DESK_FULL_T_END_US = 2.0
DESK_SWEEP_POINTS = 8


@dataclass
class FigureOutput:
    """Files written by one pipeline run plus the events and failures met on the way."""

    name: str
    files: list[Path] = field(default_factory=list)
    events: list[NumericalEvent] = field(default_factory=list)
    failures: int = 0


def _subsample(values: list[float], limit: int) -> list[float]:
    if len(values) <= limit:
        return values
    picks = np.unique(np.round(np.linspace(0, len(values) - 1, limit)).astype(int))
    return [values[i] for i in picks]


def _events_frame(events: list[NumericalEvent]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "type": e.type.value,
                "t_ns": e.t_ns if e.t_ns is not None else math.nan,
                "message": e.message,
            }
            for e in events
        ],
        columns=["type", "t_ns", "message"],
    )


class FigurePipeline:
    """
    Device resolution and table writers for one scenario.

    Args:
        scenario: Validated scenario
        config: Runtime configuration (threads, tolerances, output directory)
        out_dir: Output directory; defaults to the scenario's ``outputs.directory``
        paper_scale: Use the scenario's full truncations and trajectory policy instead of
            desk-scale caps
        seed: Overrides ``run.seed``
        entanglement: Overrides ``outputs.entanglement``
        plots: Overrides ``outputs.plots``
        snapshots: Dump reduced density matrices at ``run.snapshot_times_us`` as binary
            files under ``<out_dir>/snapshots``
    """

    def __init__(
        self,
        scenario: Scenario,
        config: Config | None = None,
        out_dir: str | Path | None = None,
        paper_scale: bool = False,
        seed: int | None = None,
        entanglement: bool | None = None,
        plots: bool | None = None,
        runner: SweepRunner | None = None,
        snapshots: bool = False,
    ) -> None:
        self.scenario = scenario
        self.config = config or Config()
        self.out_dir = Path(out_dir or scenario.outputs.directory)
        self.paper_scale = paper_scale
        self.seed = scenario.run.seed if seed is None else seed
        self.entanglement = scenario.outputs.entanglement if entanglement is None else entanglement
        self.plots = scenario.outputs.plots if plots is None else plots
        self.snapshots = snapshots
        self.runner = runner or SweepRunner(concurrency=self.config.threads)
        self.hash = scenario.sha256()
        self._logger = logger

    # Device

    @cached_property
    def spectrum(self) -> QubitSpectrum:
        return diagonalize(self.scenario.fluxonium_spec(), self.scenario.resonance.level_count)

    @cached_property
    def h_level(self) -> int:
        resonance = self.scenario.resonance
        if resonance.h_level is not None:
            if resonance.h_level >= self.spectrum.level_count:
                raise ParameterError(
                    "resonance.h_level outside the diagonalized levels",
                    details={"h_level": resonance.h_level},
                )
            return resonance.h_level
        level, residual = find_multiphoton_resonance(
            self.spectrum, self.scenario.omega_r, resonance.k, resonance.g_level
        )
        self._logger.info(
            f"{resonance.k}-photon resonance with level {level} "
            f"(residual {angular_to_mhz(residual):.1f} MHz)"
        )
        return level

    def reduced_params(self, epsilon_d: float | None = None) -> ReducedParams:
        """Reduced parameters at ``epsilon_d`` (rad/ns); the first grid amplitude by default."""
        sc = self.scenario
        eps = self.scenario.epsilon_grid()[0] if epsilon_d is None else epsilon_d
        args = (self.spectrum, sc.g, sc.omega_r, sc.omega_d, eps, sc.kappa)
        if sc.resonance.k == 3:
            return third_order_params(
                *args, sc.resonance.g_level, self.h_level, margin=self.config.rwa_margin
            )
        return second_order_params(
            *args, sc.resonance.g_level, self.h_level, margin=self.config.rwa_margin
        )

    @cached_property
    def base_params(self) -> ReducedParams:
        return self.reduced_params()

    def level_convergence(self) -> dict[str, Any]:
        """Level count at which the two-photon coupling sum settles, next to the count in use."""
        resonance = self.scenario.resonance
        summary: dict[str, Any] = {
            "level_count": resonance.level_count,
            "converged_level_count": None,
            "note": "",
        }
        if resonance.k != 2:
            summary["note"] = "not applicable: three-photon coupling"
            return summary
        try:
            converged = converge_level_count(
                self.scenario.fluxonium_spec(),
                self.scenario.g,
                self.scenario.omega_r,
                resonance.g_level,
                self.h_level,
                start=resonance.level_count,
            )
        except (ConvergenceError, ParameterError) as e:
            self._logger.warning(f"Intermediate-level sum not converged: {e}")
            summary["note"] = str(e)
            return summary
        summary["converged_level_count"] = converged.level_count
        if converged.level_count > resonance.level_count:
            self._logger.warning(
                f"g_eff still moves above {resonance.level_count} levels; "
                f"resonance.level_count >= {converged.level_count} is advised"
            )
        return summary

    @cached_property
    def full_dressing(self) -> SWExpansion:
        """First-order expansion on the j_max levels the full model keeps."""
        levels = self.scenario.truncations.j_max
        return expand(
            self.spectrum.truncated(levels),
            self.scenario.g,
            self.scenario.omega_r,
            order=1,
            margin=self.config.rwa_margin,
        )

    @property
    def reduced_n_max(self) -> int:
        return self.scenario.truncations.n_max

    @property
    def full_n_max(self) -> int:
        n_max = self.scenario.truncations.n_max
        return n_max if self.paper_scale else min(n_max, DESK_FULL_N_MAX)

    def trajectory_count(self, epsilon_d: float) -> int:
        if self.scenario.run.trajectories is not None:
            return self.scenario.run.trajectories
        return trajectory_policy(epsilon_d) if self.paper_scale else DESK_TRAJECTORIES

    def stepper(self) -> StepperConfig:
        return StepperConfig(
            dt_ns=self.scenario.run.dt_ns,
            renorm_tolerance=self.config.trace_renorm_tolerance,
            abort_tolerance=self.config.trace_abort_tolerance,
        )

    def time_grid(self, t_end_us: float | None = None) -> np.ndarray:
        t_end = self.scenario.run.t_end_us if t_end_us is None else t_end_us
        return make_time_grid(us_to_ns(t_end), self.scenario.run.dt_ns)

    def sweep_grid(self) -> list[float]:
        grid = self.scenario.epsilon_grid()
        return grid if self.paper_scale else _subsample(grid, DESK_SWEEP_POINTS)

    def fixed_epsilon(self) -> float:
        """The scenario's single amplitude, or 12 MHz when it sweeps."""
        grid = self.scenario.epsilon_grid()
        return grid[0] if len(grid) == 1 else mhz_to_angular(FIG3_EPSILON_MHZ)

    def full_system(self, epsilon_d: float) -> FullSystem:
        sc = self.scenario
        return FullSystem(
            spectrum=self.spectrum,
            omega_r=sc.omega_r,
            omega_d=sc.omega_d,
            g=sc.g,
            kappa=sc.kappa,
            epsilon_d=epsilon_d,
            n_max=self.full_n_max,
            j_max=sc.truncations.j_max,
        )

    def _write(self, name: str, table: pd.DataFrame | list[dict[str, Any]], out: FigureOutput) -> Path:
        path = write_table(self.out_dir / name, table, self.hash)
        out.files.append(path)
        return path

    def _finish(self, out: FigureOutput) -> FigureOutput:
        if out.events:
            self._write(f"{out.name}_events.csv", _events_frame(out.events), out)
        return out

    def _plot(self, path: Path, x: str, ys: list[str], out: FigureOutput, **labels: str) -> None:
        if self.plots:
            out.files.append(render_csv(path, x, ys, **labels))

    # Subcommands

    def write_spectrum(self, name: str = "spectrum") -> FigureOutput:
        """``spectrum.csv`` (one row per level) and ``charge_matrix.csv`` (every n_ij)."""
        out = FigureOutput(name)
        spectrum = self.spectrum
        g_level = self.scenario.resonance.g_level
        omega_r = self.scenario.omega_r
        rows = [
            {
                "level": j,
                "omega_over_2pi_GHz": angular_to_ghz(float(spectrum.omega[j])),
                "n_abs_from_g": float(abs(spectrum.n_matrix[g_level, j])),
                "detuning_2wr_GHz": angular_to_ghz(float(spectrum.omega[j]) - 2.0 * omega_r),
                "detuning_3wr_GHz": angular_to_ghz(float(spectrum.omega[j]) - 3.0 * omega_r),
            }
            for j in range(spectrum.level_count)
        ]
        path = self._write("spectrum.csv", rows, out)
        levels = range(spectrum.level_count)
        self._write(
            "charge_matrix.csv",
            [
                {
                    "i": i,
                    "j": j,
                    "re": float(spectrum.n_matrix[i, j].real),
                    "im": float(spectrum.n_matrix[i, j].imag),
                }
                for i in levels
                for j in levels
            ],
            out,
        )
        self._plot(path, "level", ["omega_over_2pi_GHz"], out, ylabel="omega_j / 2pi (GHz)")
        return self._finish(out)

    def write_reduce(self) -> FigureOutput:
        """Reduced parameters (MHz), RWA margins and validity checks at the first grid amplitude."""
        out = FigureOutput("reduce")
        params = self.base_params
        sc = self.scenario
        report = rwa_validity_report(
            self.spectrum, sc.g, sc.omega_r, sc.omega_d, params.epsilon_d, sc.kappa,
            margin=self.config.rwa_margin,
        )
        context = CheckContext(
            g=sc.g,
            omega_r=sc.omega_r,
            omega_d=sc.omega_d,
            epsilon_d=params.epsilon_d,
            kappa=sc.kappa,
            spectrum=self.spectrum,
            params=params,
            n_max=self.reduced_n_max,
        )
        checks = default_chain(self.config.rwa_margin).check_all(context)
        if not report.ok:
            self._logger.warning(f"RWA margins exceeded for {len(report.flags)} level pair(s)")
        for failure in checks.failures:
            self._logger.warning(f"Check {failure.check_name} failed: {failure.reason}")
        path = write_json(
            self.out_dir / "reduced_params.json",
            {
                "params": params.to_mhz_dict(),
                "validity": report.to_dict(),
                "levels": self.level_convergence(),
                "checks": checks.to_rows(),
            },
            self.hash,
        )
        out.files.append(path)
        return self._finish(out)

    def _rate_row(self, epsilon_d: float) -> dict[str, Any]:
        rates = transition_rates(self.base_params.with_drive(epsilon_d=epsilon_d))
        return {
            "gamma_g": per_ns_to_per_us(rates.gamma_g),
            "gamma_h": per_ns_to_per_us(rates.gamma_h),
            "gamma": per_ns_to_per_us(rates.gamma),
            "Pg_ss": rates.Pg_ss,
            "Ph_ss": rates.Ph_ss,
            "n_trunc": rates.n_trunc,
        }

    def _fit_row(self, epsilon_d: float) -> dict[str, Any]:
        params = self.base_params.with_drive(epsilon_d=epsilon_d)
        system = build_reduced_system(params, self.reduced_n_max, self.config.dense_cutoff)
        fit = extract_relaxation(system, us_to_ns(self.scenario.run.t_end_us), self.stepper())
        return {
            "gamma_fit": per_ns_to_per_us(fit.gamma),
            "Pss_fit": fit.p_ss,
            "fit_flagged": fit.flagged,
            "initial": initial_state_policy(epsilon_d).value,
        }

    def _rows_over(self, grid: list[float], make_row: Any, empty: dict[str, Any]) -> list[dict[str, Any]]:
        result = self.runner.run([(lambda e=e: make_row(e)) for e in grid])
        rows = []
        for eps, outcome in zip(grid, result.outcomes, strict=True):
            values = outcome.value if outcome.value is not None else {
                **empty,
                "error": outcome.error,
            }
            rows.append({"epsilon_d_MHz": angular_to_mhz(eps), **values})
        return rows

    def write_rates(self, fitted: bool = False) -> FigureOutput:
        out = FigureOutput("rates")
        grid = self.scenario.epsilon_grid()
        empty_rates = {
            "gamma_g": math.nan,
            "gamma_h": math.nan,
            "gamma": math.nan,
            "Pg_ss": math.nan,
            "Ph_ss": math.nan,
            "n_trunc": 0,
        }
        rows = self._rows_over(grid, self._rate_row, empty_rates)
        frame = pd.DataFrame(rows)
        frame["epsilon_d_sq_MHz2"] = frame["epsilon_d_MHz"] ** 2
        if fitted:
            empty_fit = {
                "gamma_fit": math.nan,
                "Pss_fit": math.nan,
                "fit_flagged": True,
                "initial": "",
            }
            fits = pd.DataFrame(self._rows_over(grid, self._fit_row, empty_fit))
            for column in fits.columns.drop("epsilon_d_MHz"):
                frame["fit_error" if column == "error" else column] = fits[column].to_numpy()
        if "error" in frame.columns:
            out.failures = int(frame["error"].notna().sum())
        path = self._write("rates.csv", frame, out)
        ys = ["gamma"] + (["gamma_fit"] if fitted else [])
        self._plot(path, "epsilon_d_sq_MHz2", ys, out, ylabel="gamma (1/us)")
        return self._finish(out)

    def write_steady_scan(self, delta_a_grid: list[float] | None = None, name: str = "scan") -> FigureOutput:
        out = FigureOutput(name)
        grid = self.scenario.epsilon_grid()
        scan = steady_scan(
            self.base_params,
            grid,
            delta_a_grid,
            n_max=self.reduced_n_max,
            runner=self.runner,
            cap=self.config.steady_state_cap,
            dense_cutoff=self.config.dense_cutoff,
        )
        out.events.extend(scan.events)
        out.failures = len(scan.failed)
        frame = pd.DataFrame(scan.rows())
        frame["epsilon_d_sq_MHz2"] = frame["epsilon_d_MHz"] ** 2
        if delta_a_grid is None:
            analytic = self._rows_over(grid, self._rate_row, {"Pg_ss": math.nan})
            frame["Pg_ss_analytic"] = [row["Pg_ss"] for row in analytic]
        path = self._write(f"{name}.csv", frame, out)
        if delta_a_grid is None:
            self._plot(path, "epsilon_d_sq_MHz2", ["Pg_ss", "Ph_ss", "Pg_ss_analytic"], out)
        return self._finish(out)

    # Time evolution

    def _reduced_series(self, epsilon_d: float, t_grid: np.ndarray, snapshots: bool) -> tuple[TimeSeries, Any]:
        params = self.base_params.with_drive(epsilon_d=epsilon_d)
        system = build_reduced_system(params, self.reduced_n_max, self.config.dense_cutoff)
        series = evolve_reduced(
            system, system.initial_state(DressedLabel.G), t_grid, self.stepper(), snapshots
        )
        return series, system

    def _dump_snapshots(self, series: TimeSeries, dims: tuple[int, ...], out: FigureOutput) -> None:
        if not self.snapshots or series.snapshots is None:
            return
        for t_us in sorted(self.scenario.run.snapshot_times_us):
            t_ns = us_to_ns(t_us)
            if t_ns > series.t_ns[-1] + 1e-9:
                self._logger.debug(f"Snapshot at {t_us} us lies past the run end")
                continue
            index = int(np.argmin(np.abs(series.t_ns - t_ns)))
            rho = DensityMatrix(series.snapshots[index], dims, BasisTag.REDUCED_ROTATING)
            out.files.append(dump_snapshot(self.out_dir / "snapshots" / f"reduced_t{t_us:g}us.bin", rho))

    def _entanglement_columns(self, snapshots: list[np.ndarray], dims: tuple[int, ...]) -> dict[str, list[float]]:
        convention = self.scenario.outputs.e_n_convention
        results = [
            negativity(DensityMatrix(s, dims, BasisTag.REDUCED_ROTATING)) for s in snapshots
        ]
        return {
            "negativity": [r.negativity for r in results],
            "log_negativity": [r.log_negativity for r in results],
            "E_N": [r.value(convention) for r in results],
        }

    def run_reduced(
        self,
        epsilon_d: float,
        out: FigureOutput,
        name: str = "reduced_timeseries.csv",
        entanglement: bool | None = None,
    ) -> tuple[TimeSeries, Any]:
        series, system = self._reduced_series(epsilon_d, self.time_grid(), True)
        out.events.extend(series.events)
        self._dump_snapshots(series, system.dims, out)
        with_negativity = self.entanglement if entanglement is None else entanglement
        extra = (
            self._entanglement_columns(series.snapshots or [], system.dims)
            if with_negativity
            else None
        )
        path = self._write(name, frame_from_series(series, extra=extra), out)
        self._plot(path, "t_ns", ["P_g", "P_h"], out)
        return series, system

    def run_semiclassical(
        self,
        epsilon_d: float,
        out: FigureOutput,
        name: str = "sc_timeseries.csv",
        entanglement: bool | None = None,
    ) -> TimeSeries:
        system = self.full_system(epsilon_d)
        psi0 = np.zeros(system.j_max, dtype=complex)
        psi0[self.scenario.resonance.g_level] = 1.0
        series = evolve_semiclassical(system, psi0, 0.0, self.time_grid(), self.stepper())
        out.events.extend(series.events)
        extra = None
        with_negativity = self.entanglement if entanglement is None else entanglement
        if with_negativity:
            zeros = [0.0] * len(series)
            extra = {"negativity": zeros, "log_negativity": zeros, "E_N": zeros}
        path = self._write(name, frame_from_series(series, extra=extra), out)
        self._plot(path, "t_ns", ["P0", "n_avg"], out)
        return series

    def full_initial_state(self, system: FullSystem) -> StateVector:
        dressed = basis_state(
            system.dims, (self.scenario.resonance.g_level, 0), BasisTag.DRESSED_ROTATING
        )
        return lab_frame_state(self.full_dressing, dressed)

    def run_full(self, epsilon_d: float, out: FigureOutput, name: str = "full_timeseries.csv") -> TimeSeries:
        system = self.full_system(epsilon_d)
        t_end = self.scenario.run.t_end_us
        if not self.paper_scale:
            t_end = min(t_end, DESK_FULL_T_END_US)
        ensemble = monte_carlo_evolve(
            system,
            self.full_initial_state(system),
            self.time_grid(t_end),
            self.trajectory_count(epsilon_d),
            self.seed,
            bisection_tolerance=self.config.bisection_tolerance,
            runner=self.runner,
        )
        path = self._write(name, frame_from_series(ensemble.series), out)
        self._plot(path, "t_ns", [f"P{j}" for j in range(system.j_max)], out)
        return ensemble.series

    def write_evolve(self, models: list[ModelKind] | None = None) -> FigureOutput:
        out = FigureOutput("evolve")
        eps = self.fixed_epsilon()
        for model in models or self.scenario.run.models:
            if model is ModelKind.REDUCED:
                self.run_reduced(eps, out)
            elif model is ModelKind.SEMICLASSICAL:
                self.run_semiclassical(eps, out)
            else:
                self.run_full(eps, out)
        return self._finish(out)

    # Figures

    def run_figure(self, figure: FigureName | str) -> FigureOutput:
        name = FigureName(figure)
        self._logger.info(
            f"Running {name.value} ({'paper' if self.paper_scale else 'desk'} scale)",
            extra={"scenario_sha256": self.hash},
        )
        if name is FigureName.FIG1B:
            return self.write_spectrum(name.value)
        if name is FigureName.FIG2A:
            return self.write_steady_scan(name=name.value)
        if name is FigureName.FIG2B:
            out = self.write_rates(fitted=True)
            out.name = name.value
            return out
        if name is FigureName.FIG2C:
            return self._fig2c()
        if name is FigureName.FIG3:
            return self._fig3()
        return self._fig4()

    def _fig2c(self) -> FigureOutput:
        deltas = self.scenario.delta_a_grid()
        if deltas is None:
            start, stop, count = DEFAULT_DELTA_A_MHZ
            deltas = [mhz_to_angular(v) for v in np.linspace(start, stop, count)]
        out = self.write_steady_scan(deltas, name=FigureName.FIG2C.value)
        return out

    def _fig3(self) -> FigureOutput:
        out = FigureOutput(FigureName.FIG3.value)
        eps = self.fixed_epsilon()
        models = self.scenario.run.models
        reduced = None
        if ModelKind.REDUCED in models:
            reduced = self.run_reduced(eps, out, entanglement=True)
        if ModelKind.SEMICLASSICAL in models:
            self.run_semiclassical(eps, out, entanglement=True)
        if ModelKind.FULL in models:
            full = self.run_full(eps, out)
            if reduced is not None:
                self._write("tracking.csv", self._tracking_rows(full, *reduced), out)
        return self._finish(out)

    def _tracking_rows(self, full: TimeSeries, reduced: TimeSeries, system: Any) -> list[dict[str, Any]]:
        """Bare P_g of the full model against the lab-mapped reduced state."""
        params = system.params
        g_level = self.scenario.resonance.g_level
        rows = []
        for t_us in TRACKING_TIMES_US:
            t_ns = us_to_ns(t_us)
            if t_ns > full.t_ns[-1] or reduced.snapshots is None:
                continue
            i_full = int(np.argmin(np.abs(full.t_ns - t_ns)))
            i_red = int(np.argmin(np.abs(reduced.t_ns - t_ns)))
            if self.h_level >= self.full_dressing.spectrum.level_count:
                continue
            rho = DensityMatrix(reduced.snapshots[i_red], system.dims, BasisTag.REDUCED_ROTATING)
            lab = reduced_to_lab(
                self.full_dressing, rho, g_level, self.h_level, params.order_k,
                params.omega_d, float(reduced.t_ns[i_red]),
            )
            levels, photons = lab.dims
            pops = np.real(np.diagonal(lab.matrix)).reshape(levels, photons).sum(axis=1)
            rows.append(
                {
                    "t_us": t_us,
                    "Pg_full": float(full[f"P{g_level}"][i_full]),
                    "stderr_Pg": float(full["stderr_Pg"][i_full]),
                    "Pg_reduced_lab": float(pops[g_level]),
                }
            )
        return rows

    def _fig4_point(self, epsilon_d: float, t_grid: np.ndarray, indices: list[int]) -> list[dict[str, Any]]:
        series, _ = self._reduced_series(epsilon_d, t_grid, False)
        system = self.full_system(epsilon_d)
        psi0 = np.zeros(system.j_max, dtype=complex)
        psi0[self.scenario.resonance.g_level] = 1.0
        sc = evolve_semiclassical(system, psi0, 0.0, t_grid, self.stepper())
        rates = transition_rates(self.base_params.with_drive(epsilon_d=epsilon_d))
        est_pg, _ = population_estimate(rates, us_to_ns(ESTIMATE_TIME_US), DressedLabel.G)

        eps_mhz = angular_to_mhz(epsilon_d)
        g_col = f"P{self.scenario.resonance.g_level}"
        rows = []
        for i in indices:
            t_us = float(t_grid[i]) / 1e3
            rows.append(
                {"epsilon_d_MHz": eps_mhz, "t_us": t_us, "model": ModelKind.REDUCED.value,
                 "P_g": float(series["P_g"][i]), "n_avg": float(series["n_avg"][i])}
            )
            rows.append(
                {"epsilon_d_MHz": eps_mhz, "t_us": t_us, "model": ModelKind.SEMICLASSICAL.value,
                 "P_g": float(sc[g_col][i]), "n_avg": float(sc["n_avg"][i])}
            )
        rows.append(
            {"epsilon_d_MHz": eps_mhz, "t_us": ESTIMATE_TIME_US, "model": "estimate",
             "P_g": float(est_pg), "n_avg": math.nan}
        )
        return rows

    def _fig4(self) -> FigureOutput:
        out = FigureOutput(FigureName.FIG4.value)
        times = sorted(self.scenario.run.snapshot_times_us)
        t_grid = self.time_grid(max(times))
        indices = [int(np.argmin(np.abs(t_grid - us_to_ns(t)))) for t in times]
        grid = self.sweep_grid()

        result = self.runner.run([(lambda e=e: self._fig4_point(e, t_grid, indices)) for e in grid])
        rows: list[dict[str, Any]] = []
        for eps, outcome in zip(grid, result.outcomes, strict=True):
            if outcome.value is None:
                out.failures += 1
                rows.append(
                    {"epsilon_d_MHz": angular_to_mhz(eps), "t_us": math.nan, "model": "error",
                     "P_g": math.nan, "n_avg": math.nan, "error": outcome.error}
                )
                continue
            rows.extend(outcome.value)
        frame = pd.DataFrame(rows)
        self._write("fig4_snapshots.csv", frame, out)
        self._write("readout_window.csv", readout_window(frame), out)
        return self._finish(out)


def readout_window(
    snapshots: pd.DataFrame,
    ground_threshold: float = READOUT_WINDOW_GROUND,
    photon_threshold: float = READOUT_WINDOW_PHOTONS,
    model: str = ModelKind.REDUCED.value,
) -> pd.DataFrame:
    """
    Drive amplitudes where the ground population survives while the cavity is bright.

    A point is inside the transient readout window when P_g > ``ground_threshold`` and
    n_avg > ``photon_threshold`` at that snapshot time.
    """
    rows = snapshots[snapshots["model"] == model].copy()
    rows["in_window"] = (rows["P_g"] > ground_threshold) & (rows["n_avg"] > photon_threshold)
    return rows[["t_us", "epsilon_d_MHz", "P_g", "n_avg", "in_window"]].reset_index(drop=True)


def run_figure(
    scenario: Scenario, figure: FigureName | str, config: Config | None = None, **options: Any
) -> FigureOutput:
    """Run one figure pipeline; per-point failures are annotated in the tables."""
    pipeline = FigurePipeline(scenario, config, **options)
    try:
        return pipeline.run_figure(figure)
    except MistSimError:
        logger.error(f"Figure {figure} failed")
        raise
