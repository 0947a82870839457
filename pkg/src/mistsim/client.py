"""MistSimulator - main library entry point."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from mistsim.core.config import Config
from mistsim.core.logging import configure_logging, get_logger
from mistsim.core.types import FigureName
from mistsim.figures import FigureOutput, FigurePipeline
from mistsim.rates import RateResult, transition_rates
from mistsim.scenario import Scenario, parse_scenario
from mistsim.spectrum import QubitSpectrum
from mistsim.sw import ReducedParams
from mistsim.sweep import SweepRunner


class MistSimulator:
    """
    Facade over scenario loading, the sweep runner and the figure pipelines.

    Example:
        >>> sim = MistSimulator()
        >>> scenario = sim.load("table1")
        >>> sim.spectrum(scenario).omega[3]
        >>> sim.run_figure(scenario, "fig2a", out_dir="results")
    """

    def __init__(self, config: Config | None = None, log_level: int | str | None = None) -> None:
        self._config = config or Config.from_env()
        configure_logging(level=log_level or self._config.log_level)
        self._logger = get_logger("client")
        self._runner = SweepRunner(concurrency=self._config.threads)
        self._logger.debug(f"MistSimulator ready ({self._config.threads} worker threads)")

    @property
    def config(self) -> Config:
        return self._config

    @property
    def runner(self) -> SweepRunner:
        return self._runner

    def load(self, scenario: str | Path) -> Scenario:
        """Parse a scenario file or shipped scenario name."""
        return parse_scenario(scenario)

    def pipeline(self, scenario: Scenario, **options: Any) -> FigurePipeline:
        options.setdefault("out_dir", None)
        if options["out_dir"] is None and "MIST_SIM_OUTPUT_DIR" in os.environ:
            options["out_dir"] = self._config.output_dir
        return FigurePipeline(scenario, self._config, runner=self._runner, **options)

    def spectrum(self, scenario: Scenario) -> QubitSpectrum:
        return self.pipeline(scenario).spectrum

    def reduced_params(self, scenario: Scenario, epsilon_d: float | None = None) -> ReducedParams:
        """Reduced parameters at ``epsilon_d`` in rad/ns (first scenario amplitude by default)."""
        return self.pipeline(scenario).reduced_params(epsilon_d)

    def transition_rates(self, scenario: Scenario, epsilon_d: float | None = None) -> RateResult:
        return transition_rates(self.reduced_params(scenario, epsilon_d))

    def run_figure(self, scenario: Scenario, figure: FigureName | str, **options: Any) -> FigureOutput:
        return self.pipeline(scenario, **options).run_figure(figure)
