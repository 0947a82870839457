"""
Type definitions for mistsim.

Enums shared across modules plus the generic time-series container.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from mistsim.core.events import NumericalEvent

ComplexArray: TypeAlias = npt.NDArray[np.complex128]
RealArray: TypeAlias = npt.NDArray[np.float64]

REGIME_THRESHOLD = 0.95


class BasisTag(str, Enum):
    """Basis bookkeeping for operators and states."""

    BARE_LAB = "bare_lab"
    DRESSED_ROTATING = "dressed_rotating"
    REDUCED_ROTATING = "reduced_rotating"


class Regime(str, Enum):
    """Steady-state drive regime."""

    SUB_MIST = "sub-MIST"
    MIST = "MIST"
    SUPER_MIST = "super-MIST"

    @classmethod
    def classify(cls, pg: float, ph: float, threshold: float = REGIME_THRESHOLD) -> Regime:
        if pg > threshold:
            return cls.SUB_MIST
        if ph > threshold:
            return cls.SUPER_MIST
        return cls.MIST


class ModelKind(str, Enum):
    """Time-evolution models."""

    FULL = "full"
    REDUCED = "reduced"
    SEMICLASSICAL = "semiclassical"


class DressedLabel(str, Enum):
    """Initial dressed state of the reduced model."""

    G = "g"
    H = "h"


class NegativityConvention(str, Enum):
    """Which entanglement number the ``E_N`` column carries."""

    LOG_NEGATIVITY = "log_negativity"
    NEGATIVITY = "negativity"


class FigureName(str, Enum):
    """Figure pipelines."""

    FIG1B = "fig1b"
    FIG2A = "fig2a"
    FIG2B = "fig2b"
    FIG2C = "fig2c"
    FIG3 = "fig3"
    FIG4 = "fig4"


@dataclass
class TimeSeries:
    """
    Observables sampled on a time grid.

    Attributes:
        t_ns: Grid times in ns
        columns: Observable name -> values, one entry per grid time
        snapshots: Optional state snapshots (density matrices or vectors)
        events: Corrective actions recorded during the run
    """

    t_ns: RealArray
    columns: dict[str, npt.NDArray[np.float64]] = field(default_factory=dict)
    snapshots: list[npt.NDArray[np.complex128]] | None = None
    events: list[NumericalEvent] = field(default_factory=list)

    def __getitem__(self, name: str) -> npt.NDArray[np.float64]:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.t_ns)

    @property
    def names(self) -> list[str]:
        return list(self.columns)
