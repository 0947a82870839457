"""Reference-device checks on the shipped table1 scenario."""

import numpy as np
import pytest

from mistsim.core.types import BasisTag, DressedLabel
from mistsim.core.units import angular_to_ghz, mhz_to_angular
from mistsim.entanglement import negativity
from mistsim.figures import FigureOutput, FigurePipeline
from mistsim.models import (
    build_reduced_system,
    evolve_reduced,
    extract_relaxation,
    required_photon_truncation,
    steady_scan,
)
from mistsim.operators import DensityMatrix, StepperConfig, make_time_grid
from mistsim.output import read_table
from mistsim.rates import population_estimate, transition_rates
from mistsim.scenario import parse_scenario
from mistsim.sw import ReducedParams

OMEGA_R_GHZ = 5.9436
THRESHOLD = 0.95


@pytest.fixture(scope="module")
def pipeline() -> FigurePipeline:
    return FigurePipeline(parse_scenario("table1"))


@pytest.fixture(scope="module")
def scan_rows(pipeline: FigurePipeline) -> list[dict]:
    scan = steady_scan(pipeline.base_params, pipeline.scenario.epsilon_grid(), n_max=100)
    assert not scan.failed
    return scan.rows()


def _first_crossing(x: np.ndarray, y: np.ndarray, level: float, rising: bool) -> float:
    """Linearly interpolated x of the first grid interval where y passes ``level``."""
    above = y > level if rising else y < level
    index = int(np.argmax(above))
    assert above[index], "no crossing on the grid"
    assert index > 0, "crossing below the first grid point"
    x0, x1, y0, y1 = x[index - 1], x[index], y[index - 1], y[index]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def _truncation(params: ReducedParams, floor: int = 30) -> int:
    required = required_photon_truncation(params)
    return max(floor, required or 0)


class TestResonance:
    """The device sits on the two-photon line."""

    def test_third_level_near_two_photons(self, pipeline: FigurePipeline) -> None:
        omega_3 = angular_to_ghz(pipeline.spectrum.omega[3])

        assert 0.95 * 2 * OMEGA_R_GHZ <= omega_3 <= 1.05 * 2 * OMEGA_R_GHZ

    def test_resolved_target_level(self, pipeline: FigurePipeline) -> None:
        assert pipeline.h_level == 3
        params = pipeline.base_params
        assert params.order_k == 2
        assert params.g_eff != 0.0
        assert pipeline.scenario.kappa / abs(params.g_eff) > 5.0


@pytest.mark.slow
class TestSteadyState:
    """Steady-state scan over the shipped 1-15 MHz sweep."""

    def test_regime_boundaries(self, scan_rows: list[dict]) -> None:
        eps = np.array([row["epsilon_d_MHz"] for row in scan_rows])
        pg = np.array([row["Pg_ss"] for row in scan_rows])
        ph = np.array([row["Ph_ss"] for row in scan_rows])

        leaves_ground = _first_crossing(eps, pg, THRESHOLD, rising=False)
        reaches_target = _first_crossing(eps, ph, THRESHOLD, rising=True)

        assert 5.0 <= leaves_ground <= 7.0
        assert 7.0 <= reaches_target <= 9.0

    def test_analytic_populations(self, pipeline: FigurePipeline, scan_rows: list[dict]) -> None:
        checked = 0
        for row in scan_rows:
            params = pipeline.base_params.with_drive(epsilon_d=mhz_to_angular(row["epsilon_d_MHz"]))
            if params.kappa / abs(params.g_eff) <= 5.0:
                continue
            rates = transition_rates(params)
            assert abs(rates.Pg_ss - row["Pg_ss"]) <= 0.05, row["epsilon_d_MHz"]
            checked += 1
        assert checked > 0


@pytest.mark.slow
class TestRates:
    """Fitted relaxation against the analytic rates."""

    @pytest.mark.parametrize("epsilon_mhz", [3.0, 5.0, 10.0, 12.0])
    def test_fitted_rate(self, pipeline: FigurePipeline, epsilon_mhz: float) -> None:
        params = pipeline.base_params.with_drive(epsilon_d=mhz_to_angular(epsilon_mhz))
        system = build_reduced_system(params, _truncation(params))

        fit = extract_relaxation(system, 5000.0, StepperConfig())
        analytic = transition_rates(params).gamma

        assert fit.gamma == pytest.approx(analytic, rel=0.1)

    def test_rate_dips_inside_window(self, pipeline: FigurePipeline) -> None:
        eps = np.arange(1.0, 15.01, 0.25)
        results = [
            transition_rates(pipeline.base_params.with_drive(epsilon_d=mhz_to_angular(e)))
            for e in eps
        ]
        gamma = np.array([r.gamma for r in results])
        inside = np.array([r.Pg_ss <= THRESHOLD and r.Ph_ss <= THRESHOLD for r in results])
        assert inside.any()

        first, last = np.flatnonzero(inside)[[0, -1]]
        minima = [
            i
            for i in range(max(first - 1, 1), min(last + 2, len(eps) - 1))
            if gamma[i] < gamma[i - 1] and gamma[i] < gamma[i + 1]
        ]
        assert minima, f"no local minimum of gamma in {eps[first]}-{eps[last]} MHz"


@pytest.mark.slow
class TestStrongDrive:
    """12 MHz: the semiclassical model stays put while the quantum model transitions."""

    def test_reduced_model_transitions(self, pipeline: FigurePipeline) -> None:
        params = pipeline.base_params.with_drive(epsilon_d=mhz_to_angular(12.0))
        system = build_reduced_system(params, _truncation(params, floor=100))
        grid = make_time_grid(5000.0, 100.0)

        series = evolve_reduced(
            system, system.initial_state(DressedLabel.G), grid, StepperConfig(), keep_snapshots=True
        )

        assert series["P_g"][-1] <= 0.3
        values = [
            negativity(DensityMatrix(s, system.dims, BasisTag.REDUCED_ROTATING)).negativity
            for s in series.snapshots or []
        ]
        assert len(values) == grid.size
        assert max(values[:-1]) > 0.05

    def test_semiclassical_model_stays(
        self, pipeline: FigurePipeline, tmp_path_factory: pytest.TempPathFactory
    ) -> None:
        runner = FigurePipeline(pipeline.scenario, out_dir=tmp_path_factory.mktemp("sc"))

        series = runner.run_semiclassical(
            mhz_to_angular(12.0), FigureOutput("fig3"), entanglement=True
        )

        assert series.t_ns[-1] == pytest.approx(5000.0)
        assert 0.8 <= series["P0"][-1] <= 1.0
        frame = read_table(runner.out_dir / "sc_timeseries.csv")
        assert (frame["negativity"] == 0.0).all()


@pytest.mark.slow
class TestPopulationEstimate:
    """Closed-form populations at 1 us against the master equation."""

    @pytest.mark.parametrize("epsilon_mhz", [9.0, 12.0, 15.0])
    def test_matches_master_equation(self, pipeline: FigurePipeline, epsilon_mhz: float) -> None:
        params = pipeline.base_params.with_drive(epsilon_d=mhz_to_angular(epsilon_mhz))
        system = build_reduced_system(params, _truncation(params))

        series = evolve_reduced(
            system, system.initial_state(DressedLabel.G), make_time_grid(1000.0), StepperConfig()
        )
        pg, _ = population_estimate(transition_rates(params), 1000.0, DressedLabel.G)

        assert float(pg) == pytest.approx(series["P_g"][-1], abs=0.05)
