"""Core plumbing: configuration, errors, logging, shared types."""

from mistsim.core.config import Config
from mistsim.core.events import NumericalEvent, NumericalEventType
from mistsim.core.exceptions import (
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
from mistsim.core.logging import configure_logging, get_logger
from mistsim.core.types import (
    BasisTag,
    DressedLabel,
    FigureName,
    ModelKind,
    NegativityConvention,
    Regime,
    TimeSeries,
)

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
    "ModelKind",
    "NegativityConvention",
    "NumericalError",
    "NumericalEvent",
    "NumericalEventType",
    "ParameterError",
    "Regime",
    "ResonanceError",
    "ScenarioError",
    "StepInstabilityError",
    "SteadyStateError",
    "TimeSeries",
    "TruncationError",
    "configure_logging",
    "get_logger",
]
