"""
Scenario files.

A scenario is a strict JSON document. Units live in the key names (``_GHz``, ``_MHz``,
``_us``, ``_ns``); values are ordinary frequencies and are converted to angular units only
by the accessors on :class:`Scenario`.
"""

from __future__ import annotations

import hashlib
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from mistsim.core.exceptions import ScenarioError
from mistsim.core.logging import get_logger
from mistsim.core.types import ModelKind, NegativityConvention
from mistsim.core.units import ghz_to_angular, mhz_to_angular
from mistsim.spectrum.fluxonium import FluxoniumSpec

logger = get_logger("scenario")

SHIPPED_SCENARIOS = ("table1",)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, frozen=True)


class Sweep(_Strict):
    """Inclusive linear grid from ``start`` to ``stop`` with ``count`` points."""

    start: float
    stop: float
    count: int = Field(ge=2)

    @model_validator(mode="after")
    def _finite(self) -> Sweep:
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("sweep bounds must be finite")
        return self

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]


class QubitBlock(_Strict):
    E_C_GHz: float = Field(gt=0, allow_inf_nan=False)
    E_L_GHz: float = Field(gt=0, allow_inf_nan=False)
    E_J_GHz: float = Field(ge=0, allow_inf_nan=False)
    phi_ext: float = Field(default=0.0, allow_inf_nan=False)


class CircuitBlock(_Strict):
    omega_r_GHz: float = Field(gt=0, allow_inf_nan=False)
    omega_d_GHz: float = Field(gt=0, allow_inf_nan=False)
    g_GHz: float = Field(gt=0, allow_inf_nan=False)
    kappa_MHz: float = Field(gt=0, allow_inf_nan=False)
    epsilon_d_MHz: float | Sweep

    @field_validator("epsilon_d_MHz")
    @classmethod
    def _finite_drive(cls, value: float | Sweep) -> float | Sweep:
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError("drive amplitude must be finite")
        return value


class ResonanceBlock(_Strict):
    k: Literal[2, 3] = 2
    g_level: int = Field(default=0, ge=0)
    h_level: int | None = Field(default=None, ge=1)
    level_count: int = Field(default=8, ge=2)


class TruncationBlock(_Strict):
    n_max: int = Field(default=100, ge=20)
    j_max: int = Field(default=4, ge=2)
    ho_truncation: int = Field(default=150, ge=20)


class RunBlock(_Strict):
    t_end_us: float = Field(default=5.0, gt=0, allow_inf_nan=False)
    dt_ns: float = Field(default=2.5, gt=0, allow_inf_nan=False)
    models: list[ModelKind] = Field(default_factory=lambda: [ModelKind.REDUCED])
    seed: int = 0
    trajectories: int | None = Field(default=None, ge=1)
    delta_a_MHz: float | Sweep | None = None
    snapshot_times_us: list[float] = Field(default_factory=lambda: [0.25, 1.0, 5.0])

    @field_validator("models", mode="before")
    @classmethod
    def _models(cls, value: Any) -> Any:
        # strict mode rejects plain strings for enums
        if isinstance(value, list):
            return [ModelKind(v) if isinstance(v, str) else v for v in value]
        return value

    @field_validator("delta_a_MHz")
    @classmethod
    def _finite_detuning(cls, value: float | Sweep | None) -> float | Sweep | None:
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError("drive detuning must be finite")
        return value

    @field_validator("snapshot_times_us")
    @classmethod
    def _snapshots(cls, value: list[float]) -> list[float]:
        if any(not math.isfinite(t) or t < 0 for t in value):
            raise ValueError("snapshot times must be finite and non-negative")
        return value


class OutputBlock(_Strict):
    directory: str = "results"
    entanglement: bool = False
    plots: bool = False
    e_n_convention: NegativityConvention = NegativityConvention.LOG_NEGATIVITY

    @field_validator("e_n_convention", mode="before")
    @classmethod
    def _convention(cls, value: Any) -> Any:
        return NegativityConvention(value) if isinstance(value, str) else value


class Scenario(_Strict):
    """Validated scenario; see ``scenarios/table1.json`` for the reference device."""

    qubit: QubitBlock
    circuit: CircuitBlock
    resonance: ResonanceBlock = Field(default_factory=ResonanceBlock)
    truncations: TruncationBlock = Field(default_factory=TruncationBlock)
    run: RunBlock = Field(default_factory=RunBlock)
    outputs: OutputBlock = Field(default_factory=OutputBlock)

    @model_validator(mode="after")
    def _consistent(self) -> Scenario:
        if self.truncations.ho_truncation // 4 < self.resonance.level_count:
            raise ValueError("ho_truncation / 4 must be at least resonance.level_count")
        if self.truncations.j_max > self.resonance.level_count:
            raise ValueError("truncations.j_max must not exceed resonance.level_count")
        return self

    def fluxonium_spec(self) -> FluxoniumSpec:
        return FluxoniumSpec(
            E_C=self.qubit.E_C_GHz,
            E_L=self.qubit.E_L_GHz,
            E_J=self.qubit.E_J_GHz,
            phi_ext=self.qubit.phi_ext,
            ho_truncation=self.truncations.ho_truncation,
        )

    @property
    def omega_r(self) -> float:
        return ghz_to_angular(self.circuit.omega_r_GHz)

    @property
    def omega_d(self) -> float:
        return ghz_to_angular(self.circuit.omega_d_GHz)

    @property
    def g(self) -> float:
        return ghz_to_angular(self.circuit.g_GHz)

    @property
    def kappa(self) -> float:
        return mhz_to_angular(self.circuit.kappa_MHz)

    def epsilon_grid(self) -> list[float]:
        """Drive amplitudes in rad/ns."""
        eps = self.circuit.epsilon_d_MHz
        values = eps.values() if isinstance(eps, Sweep) else [eps]
        return [mhz_to_angular(v) for v in values]

    def delta_a_grid(self) -> list[float] | None:
        delta = self.run.delta_a_MHz
        if delta is None:
            return None
        values = delta.values() if isinstance(delta, Sweep) else [delta]
        return [mhz_to_angular(v) for v in values]

    def sha256(self) -> str:
        """Hash of the canonical JSON form; identical for equivalent files."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(self, **blocks: dict[str, Any]) -> Scenario:
        """Copy with some fields of some blocks replaced (validated again)."""
        data = self.model_dump(mode="json")
        for block, values in blocks.items():
            data[block] = {**data.get(block, {}), **values}
        return _validate(data)


def _location(error: dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "$"


def _validate(data: Any) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ScenarioError(
            first["msg"],
            path=_location(first),
            details={"error_count": e.error_count()},
        ) from e


def parse_scenario_text(text: str) -> Scenario:
    """
    Raises:
        ScenarioError: invalid JSON (with position) or schema violation (with JSON path)
    """
    if not text.strip():
        raise ScenarioError("empty scenario file", path="line 1 column 1")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, path=f"line {e.lineno} column {e.colno}") from e
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", path="$")
    return _validate(data)


def parse_scenario(path: str | Path) -> Scenario:
    """
    Load a scenario file, or a shipped scenario by name (``table1``).

    Raises:
        ScenarioError: unreadable file, invalid JSON or schema violation
    """
    name = str(path)
    if name in SHIPPED_SCENARIOS:
        text = resources.files("mistsim.scenarios").joinpath(f"{name}.json").read_text("utf-8")
        logger.debug(f"Loaded shipped scenario {name}")
        return parse_scenario_text(text)
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ScenarioError(f"cannot read scenario: {e}", path=str(file_path)) from e
    return parse_scenario_text(text)
