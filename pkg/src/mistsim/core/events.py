"""
Numerical event records.

Solvers attach these to their results whenever they take a corrective action that a
reader of the output should be able to audit.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class NumericalEventType(str, Enum):
    """Kinds of corrective actions taken during a computation."""

    TRACE_RENORMALIZED = "trace.renormalized"
    NORM_RENORMALIZED = "norm.renormalized"
    TRUNCATION_ESCALATED = "truncation.escalated"
    LEVELS_EXTENDED = "levels.extended"
    VALIDITY_WARNING = "validity.warning"
    POINT_FAILED = "point.failed"


@dataclass
class NumericalEvent:
    """A single auditable event."""

    type: NumericalEventType
    message: str
    t_ns: float | None = None
    data: dict[str, Any] = field(default_factory=dict)
