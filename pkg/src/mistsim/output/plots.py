"""Static PNG rendering of output CSVs (needs the ``plots`` extra)."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from mistsim.core.exceptions import ConfigurationError
from mistsim.core.logging import get_logger
from mistsim.output.tables import read_table

logger = get_logger("output.plots")


def _pyplot():  # type: ignore[no-untyped-def]
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise ConfigurationError(
            "plot rendering needs matplotlib; install mistsim[plots]"
        ) from e
    return plt


def render_csv(
    csv_path: str | Path,
    x: str,
    ys: Sequence[str],
    png_path: str | Path | None = None,
    xlabel: str | None = None,
    ylabel: str | None = None,
    title: str | None = None,
) -> Path:
    """Plot columns ``ys`` against ``x``; missing columns are skipped with a warning."""
    plt = _pyplot()
    frame = read_table(csv_path)
    target = Path(png_path) if png_path else Path(csv_path).with_suffix(".png")

    fig, ax = plt.subplots()
    for name in ys:
        if name not in frame.columns:
            logger.warning(f"Column {name} not in {csv_path}; skipped")
            continue
        ax.plot(frame[x], frame[name], label=name)
    ax.set_xlabel(xlabel or x)
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target
