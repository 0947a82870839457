"""
mistsim - measurement-induced state transitions in driven fluxonium readout.

Usage:
    >>> from mistsim import MistSimulator
    >>>
    >>> sim = MistSimulator()
    >>> scenario = sim.load("table1")
    >>> rates = sim.transition_rates(scenario)

Command line:
    $ mist-sim figure --scenario table1 --figure fig2a --out results
"""

__version__ = "0.1.0"

from mistsim.client import MistSimulator  # noqa: E402
from mistsim.core.config import Config  # noqa: E402
from mistsim.core.exceptions import (  # noqa: E402
    BasisMismatchError,
    ConfigurationError,
    ConvergenceError,
    DiagonalizationError,
    IntegrationError,
    MistSimError,
    NumericalError,
    ParameterError,
    ResonanceError,
    ScenarioError,
    StepInstabilityError,
    SteadyStateError,
    TruncationError,
)
from mistsim.core.types import BasisTag, DressedLabel, FigureName, ModelKind, Regime  # noqa: E402
from mistsim.scenario import Scenario, parse_scenario  # noqa: E402

__all__ = [
    "BasisMismatchError",
    "BasisTag",
    "Config",
    "ConfigurationError",
    "ConvergenceError",
    "DiagonalizationError",
    "DressedLabel",
    "FigureName",
    "IntegrationError",
    "MistSimError",
    "MistSimulator",
    "ModelKind",
    "NumericalError",
    "ParameterError",
    "Regime",
    "ResonanceError",
    "Scenario",
    "ScenarioError",
    "StepInstabilityError",
    "SteadyStateError",
    "TruncationError",
    "__version__",
    "parse_scenario",
]
