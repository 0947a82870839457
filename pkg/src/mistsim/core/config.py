"""
Configuration management for mistsim.

Handles loading runtime configuration from environment variables and validation.
Physical parameters live in scenario files, not here.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from typing import Any

from mistsim.core.exceptions import ConfigurationError

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _get_env_var(name: str, default: str | None = None, required: bool = False) -> str | None:
    """Get environment variable with optional default."""
    value = os.environ.get(name, default)
    if required and not value:
        raise ConfigurationError(f"Required environment variable {name} is not set")
    return value


def _parse_int(name: str, raw: str | None, default: int) -> int:
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigurationError(
            f"Environment variable {name} must be an integer", details={"value": raw}
        ) from e


@dataclass(frozen=True)
class Config:
    """Runtime configuration."""

    threads: int = 4
    log_level: str = "INFO"
    output_dir: str = "results"

    # Storage and solver caps
    dense_cutoff: int = 512
    steady_state_cap: int = 512

    # Validity margins
    rwa_margin: float = 0.1

    # Integrator tolerances
    bisection_tolerance: float = 1e-3
    trace_renorm_tolerance: float = 1e-7
    trace_abort_tolerance: float = 1e-4

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1", details={"threads": self.threads})
        if self.log_level.upper() not in _LOG_LEVELS:
            raise ConfigurationError(
                f"log_level must be one of {_LOG_LEVELS}", details={"log_level": self.log_level}
            )
        if self.dense_cutoff < 1 or self.steady_state_cap < 1:
            raise ConfigurationError("dense_cutoff and steady_state_cap must be positive")
        if not 0.0 < self.rwa_margin < 1.0:
            raise ConfigurationError("rwa_margin must lie in (0, 1)")
        if not 0.0 < self.bisection_tolerance < 1.0:
            raise ConfigurationError("bisection_tolerance must lie in (0, 1)")
        if not 0.0 < self.trace_renorm_tolerance < self.trace_abort_tolerance:
            raise ConfigurationError(
                "trace tolerances must satisfy 0 < trace_renorm_tolerance < trace_abort_tolerance"
            )

    @classmethod
    def from_env(cls, **overrides: Any) -> Config:
        """Load configuration from environment variables."""
        threads = overrides.get("threads") or _parse_int(
            "MIST_SIM_THREADS", _get_env_var("MIST_SIM_THREADS"), cls.threads
        )
        log_level = overrides.get("log_level") or _get_env_var(
            "MIST_SIM_LOG_LEVEL", default="INFO"
        )
        output_dir = overrides.get("output_dir") or _get_env_var(
            "MIST_SIM_OUTPUT_DIR", default=cls.output_dir
        )

        return cls(
            threads=threads,
            log_level=str(log_level).upper(),
            output_dir=output_dir,  # type: ignore
            dense_cutoff=overrides.get("dense_cutoff", cls.dense_cutoff),
            steady_state_cap=overrides.get("steady_state_cap", cls.steady_state_cap),
            rwa_margin=overrides.get("rwa_margin", cls.rwa_margin),
            bisection_tolerance=overrides.get("bisection_tolerance", cls.bisection_tolerance),
            trace_renorm_tolerance=overrides.get(
                "trace_renorm_tolerance", cls.trace_renorm_tolerance
            ),
            trace_abort_tolerance=overrides.get(
                "trace_abort_tolerance", cls.trace_abort_tolerance
            ),
        )

    def with_updates(self, **updates: Any) -> Config:
        """Create a new Config with updated values."""
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(updates)
        return Config(**current)
