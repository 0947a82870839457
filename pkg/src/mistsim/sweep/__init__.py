"""Concurrent parameter sweeps."""

from mistsim.sweep.batch import SweepOutcome, SweepResult, SweepRunner

__all__ = ["SweepOutcome", "SweepResult", "SweepRunner"]
