"""CSV, snapshot and plot outputs."""

from mistsim.output.plots import render_csv
from mistsim.output.snapshots import dump_snapshot, load_snapshot
from mistsim.output.tables import (
    frame_from_series,
    header_line,
    read_table,
    tool_version,
    write_json,
    write_table,
)

__all__ = [
    "dump_snapshot",
    "frame_from_series",
    "header_line",
    "load_snapshot",
    "read_table",
    "render_csv",
    "tool_version",
    "write_json",
    "write_table",
]
