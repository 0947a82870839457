"""
Unit conversions.

Internally every frequency is angular (rad/ns) and every time is in ns. Scenario files and
CSV outputs quote ordinary frequencies (GHz, MHz) and times in μs or ns.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def ghz_to_angular(value_ghz: float) -> float:
    """Ordinary frequency in GHz -> angular frequency in rad/ns."""
    return TWO_PI * value_ghz


def mhz_to_angular(value_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/ns."""
    return TWO_PI * value_mhz * 1e-3


def angular_to_ghz(omega: float) -> float:
    return omega / TWO_PI


def angular_to_mhz(omega: float) -> float:
    return omega / TWO_PI * 1e3


def per_ns_to_per_us(rate: float) -> float:
    """Rates are computed in 1/ns and reported in 1/μs."""
    return rate * 1e3


def us_to_ns(t_us: float) -> float:
    return t_us * 1e3
