"""Validity checks for simulation points."""

from mistsim.checks.base import Check, CheckChain, CheckContext, CheckReport, CheckResult
from mistsim.checks.validity import (
    BadCavityCheck,
    DispersiveMarginCheck,
    DissipatorMarginCheck,
    DriveSidebandCheck,
    PhotonTruncationCheck,
    default_chain,
)

__all__ = [
    "BadCavityCheck",
    "Check",
    "CheckChain",
    "CheckContext",
    "CheckReport",
    "CheckResult",
    "DispersiveMarginCheck",
    "DissipatorMarginCheck",
    "DriveSidebandCheck",
    "PhotonTruncationCheck",
    "default_chain",
]
