"""
CSV and JSON writers.

Every CSV starts with a ``# scenario_sha256=... version=...`` comment line; the table body
is written by pandas with a fixed float format so reruns are byte-identical. JSON documents
carry the same provenance as top-level keys.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from mistsim.core.logging import get_logger
from mistsim.core.types import TimeSeries

logger = get_logger("output")

FLOAT_FORMAT = "%.10g"


def tool_version() -> str:
    from mistsim import __version__

    return __version__


def header_line(scenario_hash: str) -> str:
    return f"# scenario_sha256={scenario_hash} version={tool_version()}"


def frame_from_series(
    series: TimeSeries,
    columns: Sequence[str] | None = None,
    extra: Mapping[str, Any] | None = None,
) -> pd.DataFrame:
    """``t_ns`` followed by the requested series columns (all by default) and ``extra``."""
    names = list(columns) if columns is not None else series.names
    data: dict[str, Any] = {"t_ns": np.asarray(series.t_ns, dtype=float)}
    for name in names:
        data[name] = np.asarray(series[name], dtype=float)
    for name, values in (extra or {}).items():
        data[name] = values
    return pd.DataFrame(data)


def write_table(
    path: str | Path,
    table: pd.DataFrame | Sequence[Mapping[str, Any]],
    scenario_hash: str,
) -> Path:
    """Write ``table`` as CSV under the scenario header and return the path."""
    frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(list(table))
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(header_line(scenario_hash) + "\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {target} ({len(frame)} rows)")
    return target


def read_table(path: str | Path) -> pd.DataFrame:
    """Read a CSV written by :func:`write_table`, skipping the header comment."""
    return pd.read_csv(path, comment="#")


def write_json(path: str | Path, payload: Mapping[str, Any], scenario_hash: str) -> Path:
    """Write ``payload`` with sorted keys under ``scenario_sha256`` and ``version`` keys."""
    document = {"scenario_sha256": scenario_hash, "version": tool_version(), **payload}
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(
        json.dumps(document, indent=2, sort_keys=True, default=float) + "\n", encoding="utf-8"
    )
    logger.info(f"Wrote {target}")
    return target
