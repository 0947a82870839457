"""Exponential relaxation fits of population time series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from mistsim.core.exceptions import ParameterError
from mistsim.core.logging import get_logger
from mistsim.core.types import RealArray, TimeSeries

logger = get_logger("rates.fitting")

MIN_DECAY_CONSTANTS = 3.0
_FLAT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FitResult:
    """
    Fit of P(t) = P_ss + C e^{−γt} on t ≥ t_min.

    ``flagged`` is set for a constant series, a non-decaying fit (γ ≤ 0) or a window shorter
    than three decay constants; ``message`` says which.
    """

    gamma: float
    p_ss: float
    c: float
    residual: float
    t_min: float
    flagged: bool = False
    message: str = ""

    def __bool__(self) -> bool:
        return not self.flagged


def _model(t: RealArray, gamma: float, p_ss: float, c: float) -> RealArray:
    return p_ss + c * np.exp(-gamma * t)


def _initial_guess(t: RealArray, p: RealArray) -> tuple[float, float, float]:
    """γ from the slope of log|P − P_end|, then P_ss and C by linear least squares."""
    offset = p - p[-1]
    magnitude = np.abs(offset)
    usable = magnitude > 1e-3 * float(np.max(magnitude))
    usable[-1] = False
    if np.count_nonzero(usable) >= 2:
        slope = np.polyfit(t[usable], np.log(magnitude[usable]), 1)[0]
        gamma0 = max(-float(slope), 1e-12)
    else:
        gamma0 = 1.0 / max(float(t[-1] - t[0]), 1e-12)
    design = np.column_stack([np.ones_like(t), np.exp(-gamma0 * t)])
    (p_ss0, c0), *_ = np.linalg.lstsq(design, p, rcond=None)
    return gamma0, float(p_ss0), float(c0)


def fit_relaxation(
    series: TimeSeries,
    t_min: float | None = None,
    *,
    kappa: float | None = None,
    column: str = "P_g",
) -> FitResult:
    """
    Nonlinear least squares of ``column`` against P_ss + C e^{−γt}.

    Args:
        t_min: Start of the fit window in ns; defaults to 10/κ
        kappa: Photon loss rate used for the default window

    Raises:
        ParameterError: no window start available, or fewer than four samples in the window
    """
    if t_min is None:
        if kappa is None or kappa <= 0:
            raise ParameterError("fit_relaxation needs t_min or a positive kappa")
        t_min = 10.0 / kappa
    t_all = np.asarray(series.t_ns, dtype=float)
    values = np.asarray(series[column], dtype=float)
    mask = t_all >= t_min
    if np.count_nonzero(mask) < 4:
        raise ParameterError(
            "fit window holds fewer than four samples", details={"t_min": t_min}
        )
    t = t_all[mask] - t_min
    p = values[mask]

    if float(np.ptp(p)) <= _FLAT_TOLERANCE:
        logger.warning(f"Constant {column} series; decay rate indeterminate")
        return FitResult(
            gamma=math.nan,
            p_ss=float(np.mean(p)),
            c=0.0,
            residual=0.0,
            t_min=t_min,
            flagged=True,
            message="constant series",
        )

    guess = _initial_guess(t, p)
    popt, _ = curve_fit(_model, t, p, p0=guess, xtol=1e-15, ftol=1e-15, gtol=1e-15, maxfev=20000)
    gamma, p_ss, c_shifted = (float(v) for v in popt)
    residual = float(np.sqrt(np.mean((_model(t, gamma, p_ss, c_shifted) - p) ** 2)))
    c = c_shifted * math.exp(gamma * t_min)

    message = ""
    if gamma <= 0:
        message = "non-decaying fit"
    elif gamma * float(t[-1]) < MIN_DECAY_CONSTANTS:
        message = "window covers fewer than three decay constants"
    if message:
        logger.warning(f"Relaxation fit flagged: {message}")
    return FitResult(
        gamma=gamma,
        p_ss=p_ss,
        c=c,
        residual=residual,
        t_min=t_min,
        flagged=bool(message),
        message=message,
    )
