"""Tests for the scenario-driven figure pipelines."""

import json
from pathlib import Path

import pandas as pd
import pytest

from mistsim.core.config import Config
from mistsim.core.types import BasisTag, ModelKind
from mistsim.core.units import mhz_to_angular
from mistsim.figures import (
    DESK_FULL_N_MAX,
    DESK_SWEEP_POINTS,
    DESK_TRAJECTORIES,
    FIG3_EPSILON_MHZ,
    FigurePipeline,
    readout_window,
)
from mistsim.output import load_snapshot, read_table
from mistsim.scenario import parse_scenario_text


@pytest.fixture
def pipeline(scenario_data: dict, tmp_path: Path) -> FigurePipeline:
    scenario = parse_scenario_text(json.dumps(scenario_data))
    return FigurePipeline(scenario, Config(threads=2), out_dir=tmp_path)


class TestScaling:
    """Tests for desk-scale caps and overrides."""

    def test_desk_caps(self, pipeline: FigurePipeline) -> None:
        assert pipeline.full_n_max == min(40, DESK_FULL_N_MAX)
        assert pipeline.trajectory_count(mhz_to_angular(5.0)) == DESK_TRAJECTORIES

    def test_paper_scale(self, scenario_data: dict) -> None:
        scenario = parse_scenario_text(json.dumps(scenario_data))
        pipeline = FigurePipeline(scenario, paper_scale=True, seed=11)

        assert pipeline.trajectory_count(mhz_to_angular(5.0)) == 200
        assert pipeline.seed == 11

    def test_sweep_is_subsampled(self, scenario_data: dict) -> None:
        data = {**scenario_data, "circuit": {**scenario_data["circuit"]}}
        data["circuit"]["epsilon_d_MHz"] = {"start": 1.0, "stop": 15.0, "count": 29}
        pipeline = FigurePipeline(parse_scenario_text(json.dumps(data)))

        grid = pipeline.sweep_grid()

        assert len(grid) == DESK_SWEEP_POINTS
        assert grid[0] == pytest.approx(mhz_to_angular(1.0))
        assert grid[-1] == pytest.approx(mhz_to_angular(15.0))
        assert pipeline.fixed_epsilon() == pytest.approx(mhz_to_angular(FIG3_EPSILON_MHZ))

    def test_fixed_epsilon_single_amplitude(self, pipeline: FigurePipeline) -> None:
        assert pipeline.fixed_epsilon() == pytest.approx(mhz_to_angular(5.0))


class TestReadoutWindow:
    """Tests for readout_window."""

    def test_window_selection(self) -> None:
        snapshots = pd.DataFrame(
            [
                {"epsilon_d_MHz": 10.0, "t_us": 0.25, "model": "reduced", "P_g": 0.99, "n_avg": 40.0},
                {"epsilon_d_MHz": 10.0, "t_us": 0.25, "model": "semiclassical", "P_g": 0.99, "n_avg": 40.0},
                {"epsilon_d_MHz": 2.0, "t_us": 0.25, "model": "reduced", "P_g": 0.99, "n_avg": 3.0},
                {"epsilon_d_MHz": 10.0, "t_us": 5.0, "model": "reduced", "P_g": 0.40, "n_avg": 45.0},
            ]
        )

        window = readout_window(snapshots)

        assert len(window) == 3
        assert list(window["in_window"]) == [True, False, False]


@pytest.mark.integration
class TestPipelineRuns:
    """End-to-end table writes on a small scenario."""

    def test_reduced_evolution_with_entanglement(self, pipeline: FigurePipeline) -> None:
        pipeline.entanglement = True

        out = pipeline.write_evolve([ModelKind.REDUCED])

        path = pipeline.out_dir / "reduced_timeseries.csv"
        assert path in out.files
        frame = read_table(path)
        assert list(frame.columns[:2]) == ["t_ns", "P_g"]
        assert {"negativity", "log_negativity", "E_N"} <= set(frame.columns)
        assert frame["P_g"].iloc[0] == pytest.approx(1.0, abs=1e-6)
        assert frame["E_N"].iloc[0] == pytest.approx(0.0, abs=1e-6)
        assert len(frame) == 41

    def test_identical_runs_write_identical_files(self, scenario_data: dict, tmp_path: Path) -> None:
        scenario = parse_scenario_text(json.dumps(scenario_data))
        first = FigurePipeline(scenario, out_dir=tmp_path / "a").write_evolve([ModelKind.REDUCED])
        second = FigurePipeline(scenario, out_dir=tmp_path / "b").write_evolve([ModelKind.REDUCED])

        assert [p.read_bytes() for p in first.files] == [p.read_bytes() for p in second.files]

    def test_rates_table(self, pipeline: FigurePipeline) -> None:
        out = pipeline.write_rates()

        frame = read_table(pipeline.out_dir / "rates.csv")
        assert out.failures == 0
        assert list(frame.columns[:6]) == ["epsilon_d_MHz", "gamma_g", "gamma_h", "gamma", "Pg_ss", "Ph_ss"]
        assert frame["Pg_ss"].iloc[0] + frame["Ph_ss"].iloc[0] == pytest.approx(1.0)

    def test_reduce_document(self, pipeline: FigurePipeline) -> None:
        pipeline.write_reduce()

        document = json.loads((pipeline.out_dir / "reduced_params.json").read_text(encoding="utf-8"))
        assert document["scenario_sha256"] == pipeline.hash
        assert document["params"]["order_k"] == 2
        assert [c["check"] for c in document["checks"]][-1] == "photon_truncation"

    def test_reduce_document_reports_level_convergence(self, pipeline: FigurePipeline) -> None:
        pipeline.write_reduce()

        document = json.loads((pipeline.out_dir / "reduced_params.json").read_text(encoding="utf-8"))
        levels = document["levels"]
        assert levels["level_count"] == 8
        converged = levels["converged_level_count"]
        assert (converged is not None and converged >= 8) or levels["note"]

    def test_fig3_leaves_entanglement_setting(self, pipeline: FigurePipeline) -> None:
        assert not pipeline.entanglement

        pipeline.run_figure("fig3")

        assert not pipeline.entanglement
        fig3 = read_table(pipeline.out_dir / "reduced_timeseries.csv")
        assert "E_N" in fig3.columns
        pipeline.write_evolve([ModelKind.REDUCED])
        evolve = read_table(pipeline.out_dir / "reduced_timeseries.csv")
        assert "E_N" not in evolve.columns


class TestSnapshots:
    """Tests for binary density-matrix dumps."""

    def test_dumped_at_snapshot_times(self, scenario_data: dict, tmp_path: Path) -> None:
        data = {**scenario_data, "run": {**scenario_data["run"], "snapshot_times_us": [0.05, 3.0]}}
        scenario = parse_scenario_text(json.dumps(data))
        pipeline = FigurePipeline(scenario, out_dir=tmp_path, snapshots=True)

        out = pipeline.write_evolve([ModelKind.REDUCED])

        path = tmp_path / "snapshots" / "reduced_t0.05us.bin"
        assert path in out.files
        assert not (tmp_path / "snapshots" / "reduced_t3us.bin").exists()
        rho = load_snapshot(path, BasisTag.REDUCED_ROTATING)
        assert rho.dims == (2, 41)
        assert rho.trace == pytest.approx(1.0, abs=1e-8)
        assert rho.min_eigenvalue() > -1e-8

    def test_off_by_default(self, pipeline: FigurePipeline) -> None:
        pipeline.write_evolve([ModelKind.REDUCED])

        assert not (pipeline.out_dir / "snapshots").exists()
