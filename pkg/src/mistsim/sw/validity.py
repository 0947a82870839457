"""Margins of the rotating-wave approximations behind the reduced model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from mistsim.core.logging import get_logger
from mistsim.core.types import RealArray
from mistsim.spectrum.fluxonium import QubitSpectrum
from mistsim.sw.expansion import DEFAULT_MARGIN

logger = get_logger("sw.validity")

RATIO_NAMES = ("dispersive", "drive_sideband", "dissipator")


@dataclass(frozen=True)
class ValidityFlag:
    ratio: str
    levels: tuple[int, int]
    value: float


@dataclass(frozen=True)
class ValidityReport:
    """
    Per-pair margin ratios.

    Attributes:
        r1: |g n_ij| / |ω_ij − ω_r|
        r2: |ε_d g n_ij| / |(ω_ij − ω_r)(ω_ij ± ω_d)|, worst sign
        r3: |κ g n_ij| / (ω_ij − ω_r)²
        margin: Threshold above which a ratio is flagged
        flags: Every (ratio, pair) above the margin
    """

    r1: RealArray
    r2: RealArray
    r3: RealArray
    margin: float
    flags: list[ValidityFlag] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def worst(self) -> dict[str, float]:
        return {
            name: float(np.max(ratio, initial=0.0))
            for name, ratio in zip(RATIO_NAMES, (self.r1, self.r2, self.r3), strict=True)
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "margin": self.margin,
            "worst": self.worst(),
            "flags": [
                {"ratio": f.ratio, "levels": [int(i) for i in f.levels], "value": float(f.value)} for f in self.flags
            ],
        }


def _ratio(numerator: RealArray, denominator: RealArray) -> RealArray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(numerator > 0, numerator / np.abs(denominator), 0.0)


def rwa_validity_report(
    spectrum: QubitSpectrum,
    g: float,
    omega_r: float,
    omega_d: float,
    epsilon_d: float,
    kappa: float,
    margin: float = DEFAULT_MARGIN,
) -> ValidityReport:
    """Evaluate the three margin ratios for every level pair and flag those above ``margin``."""
    coupling = np.abs(g * spectrum.n_matrix)
    w = spectrum.transitions()
    detuning = w - omega_r

    r1 = _ratio(coupling, detuning)
    r2 = np.maximum(
        _ratio(abs(epsilon_d) * coupling, detuning * (w + omega_d)),
        _ratio(abs(epsilon_d) * coupling, detuning * (w - omega_d)),
    )
    r3 = _ratio(abs(kappa) * coupling, detuning**2)

    flags = [
        ValidityFlag(name, (int(i), int(j)), float(ratio[i, j]))
        for name, ratio in zip(RATIO_NAMES, (r1, r2, r3), strict=True)
        for i, j in np.argwhere(ratio > margin)
    ]
    for flag in flags:
        logger.warning(
            f"RWA margin exceeded: {flag.ratio} ratio {flag.value:.3g} for levels {flag.levels}"
        )
    return ValidityReport(r1=r1, r2=r2, r3=r3, margin=margin, flags=flags)
