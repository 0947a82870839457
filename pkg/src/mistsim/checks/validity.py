"""Concrete checks for the reduced-model approximations."""

from __future__ import annotations

import math

from mistsim.checks.base import Check, CheckChain, CheckContext, CheckResult
from mistsim.rates.amplitudes import conditional_amplitudes
from mistsim.sw.validity import ValidityReport, rwa_validity_report

DEFAULT_MARGIN = 0.1
BAD_CAVITY_FACTOR = 5.0
TRUNCATION_SIGMAS = 10.0


def _not_applicable(name: str, missing: str) -> CheckResult:
    return CheckResult(passed=True, reason=f"not applicable: no {missing}", check_name=name)


class _MarginCheck(Check):
    """One of the three RWA ratios from the validity report."""

    _attribute = "r1"
    _label = ""

    def __init__(self, margin: float = DEFAULT_MARGIN) -> None:
        self._margin = margin

    @property
    def name(self) -> str:
        return self._label

    def _report(self, context: CheckContext) -> ValidityReport:
        assert context.spectrum is not None
        return rwa_validity_report(
            context.spectrum,
            context.g,
            context.omega_r,
            context.omega_d,
            context.epsilon_d,
            context.kappa,
            self._margin,
        )

    def check(self, context: CheckContext) -> CheckResult:
        if context.spectrum is None:
            return _not_applicable(self.name, "spectrum")
        ratios = getattr(self._report(context), self._attribute)
        worst = float(ratios.max(initial=0.0))
        if worst > self._margin:
            i, j = divmod(int(ratios.argmax()), ratios.shape[1])
            return CheckResult(
                passed=False,
                reason=f"{self.name} ratio {worst:.3g} exceeds {self._margin} for levels ({i}, {j})",
                check_name=self.name,
                metadata={"worst": worst, "levels": (i, j)},
            )
        return CheckResult(
            passed=True,
            reason=f"worst {self.name} ratio {worst:.3g}",
            check_name=self.name,
            metadata={"worst": worst},
        )


class DispersiveMarginCheck(_MarginCheck):
    """|g n_ij| / |ω_ij − ω_r| below the margin."""

    _attribute = "r1"
    _label = "dispersive_margin"


class DriveSidebandCheck(_MarginCheck):
    """|ε_d g n_ij| / |(ω_ij − ω_r)(ω_ij ± ω_d)| below the margin."""

    _attribute = "r2"
    _label = "drive_sideband"


class DissipatorMarginCheck(_MarginCheck):
    """|κ g n_ij| / (ω_ij − ω_r)² below the margin."""

    _attribute = "r3"
    _label = "dissipator_margin"


class BadCavityCheck(Check):
    """
    κ ≥ factor · |g_eff| · max(1, max|α|^k), the regime of the adiabatic elimination.
    """

    def __init__(self, factor: float = BAD_CAVITY_FACTOR) -> None:
        self._factor = factor

    @property
    def name(self) -> str:
        return "bad_cavity"

    def check(self, context: CheckContext) -> CheckResult:
        params = context.params
        if params is None:
            return _not_applicable(self.name, "reduced parameters")
        if params.kappa <= 0:
            return CheckResult(False, "kappa must be positive", self.name, {"kappa": params.kappa})
        amplitudes = conditional_amplitudes(params)
        scale = max(1.0, math.sqrt(amplitudes.max_photons) ** params.order_k)
        required = self._factor * abs(params.g_eff) * scale
        ratio = params.kappa / required if required > 0 else math.inf
        metadata = {"kappa_over_required": ratio, "photon_scale": scale}
        if params.kappa < required:
            return CheckResult(
                passed=False,
                reason=f"kappa below {self._factor}·|g_eff|·photon scale (ratio {ratio:.3g})",
                check_name=self.name,
                metadata=metadata,
            )
        return CheckResult(True, "bad-cavity limit holds", self.name, metadata)


class PhotonTruncationCheck(Check):
    """max|α|² + 10·max|α| ≤ n_max."""

    @property
    def name(self) -> str:
        return "photon_truncation"

    def check(self, context: CheckContext) -> CheckResult:
        if context.params is None or context.n_max is None:
            return _not_applicable(self.name, "reduced parameters or n_max")
        if context.params.kappa <= 0:
            return _not_applicable(self.name, "positive kappa")
        photons = conditional_amplitudes(context.params).max_photons
        required = math.ceil(photons + TRUNCATION_SIGMAS * math.sqrt(photons))
        metadata = {"required": required, "available": context.n_max}
        if required > context.n_max:
            return CheckResult(
                passed=False,
                reason=f"n_max={context.n_max} below the expected photon range {required}",
                check_name=self.name,
                metadata=metadata,
            )
        return CheckResult(True, "truncation covers the photon distribution", self.name, metadata)


def default_chain(margin: float = DEFAULT_MARGIN) -> CheckChain:
    """Every validity check in reporting order."""
    return CheckChain(
        [
            DispersiveMarginCheck(margin),
            DriveSidebandCheck(margin),
            DissipatorMarginCheck(margin),
            BadCavityCheck(),
            PhotonTruncationCheck(),
        ]
    )
