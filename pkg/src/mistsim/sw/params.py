"""Effective parameters of the reduced k-photon model."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any

from mistsim.core.exceptions import ParameterError
from mistsim.core.units import angular_to_mhz

_FRAME_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ReducedParams:
    """
    Parameters of the reduced Hamiltonian in the frame rotating at ω_d (cavity) and k·ω_d
    (upper qubit level). All frequencies are angular, rad/ns.

    Attributes:
        delta_a: ω_r − ω_d
        delta_g: ω_g + Λ_g
        delta_h: ω_h + Λ_h − k ω_d
        chi_g: Dispersive coupling of the lower level
        chi_h: Dispersive coupling of the upper level
        lambda_g: Energy shift Λ_g
        lambda_h: Energy shift Λ_h
        g_eff: Complex k-photon coupling <g|V_k0|h>
        order_k: Photon order of the resonance (2 or 3)
        kappa: Photon loss rate
        epsilon_d: Drive amplitude
        delta_q: delta_h − delta_g
        omega_r, omega_d, omega_g, omega_h: Bare frequencies the detunings derive from
        g_level, h_level: Qubit eigenstate indices of the two retained levels
    """

    delta_a: float
    delta_g: float
    delta_h: float
    chi_g: float
    chi_h: float
    lambda_g: float
    lambda_h: float
    g_eff: complex
    order_k: int
    kappa: float
    epsilon_d: float
    delta_q: float
    omega_r: float
    omega_d: float
    omega_g: float
    omega_h: float
    g_level: int = 0
    h_level: int = 3

    def __post_init__(self) -> None:
        if self.order_k not in (2, 3):
            raise ParameterError("order_k must be 2 or 3", details={"order_k": self.order_k})
        if self.kappa < 0:
            raise ParameterError("kappa must be non-negative", details={"kappa": self.kappa})
        values = [getattr(self, name) for name in ("delta_a", "delta_g", "delta_h", "chi_g", "chi_h")]
        if not all(math.isfinite(v) for v in values) or not math.isfinite(abs(self.g_eff)):
            raise ParameterError("reduced parameters must be finite")

        scale = max(abs(self.omega_r), abs(self.omega_h), 1.0)
        expected = {
            "delta_a": self.omega_r - self.omega_d,
            "delta_g": self.omega_g + self.lambda_g,
            "delta_h": self.omega_h + self.lambda_h - self.order_k * self.omega_d,
            "delta_q": self.delta_h - self.delta_g,
        }
        for name, value in expected.items():
            if abs(getattr(self, name) - value) > _FRAME_TOLERANCE * scale:
                raise ParameterError(
                    f"{name} is inconsistent with the bare frequencies",
                    details={name: getattr(self, name), "expected": value},
                )

    @classmethod
    def from_frequencies(
        cls,
        *,
        omega_r: float,
        omega_d: float,
        omega_g: float,
        omega_h: float,
        chi_g: float,
        chi_h: float,
        lambda_g: float,
        lambda_h: float,
        g_eff: complex,
        order_k: int,
        kappa: float,
        epsilon_d: float,
        g_level: int = 0,
        h_level: int = 3,
    ) -> ReducedParams:
        """Derive the frame detunings from bare frequencies and shifts."""
        delta_g = omega_g + lambda_g
        delta_h = omega_h + lambda_h - order_k * omega_d
        return cls(
            delta_a=omega_r - omega_d,
            delta_g=delta_g,
            delta_h=delta_h,
            chi_g=chi_g,
            chi_h=chi_h,
            lambda_g=lambda_g,
            lambda_h=lambda_h,
            g_eff=complex(g_eff),
            order_k=order_k,
            kappa=kappa,
            epsilon_d=epsilon_d,
            delta_q=delta_h - delta_g,
            omega_r=omega_r,
            omega_d=omega_d,
            omega_g=omega_g,
            omega_h=omega_h,
            g_level=g_level,
            h_level=h_level,
        )

    def with_drive(self, epsilon_d: float | None = None, delta_a: float | None = None) -> ReducedParams:
        """
        Same device at another drive point.

        Changing delta_a moves ω_d = ω_r − delta_a, which also moves delta_h.
        """
        eps = self.epsilon_d if epsilon_d is None else epsilon_d
        if delta_a is None:
            return replace(self, epsilon_d=eps)
        return ReducedParams.from_frequencies(
            omega_r=self.omega_r,
            omega_d=self.omega_r - delta_a,
            omega_g=self.omega_g,
            omega_h=self.omega_h,
            chi_g=self.chi_g,
            chi_h=self.chi_h,
            lambda_g=self.lambda_g,
            lambda_h=self.lambda_h,
            g_eff=self.g_eff,
            order_k=self.order_k,
            kappa=self.kappa,
            epsilon_d=eps,
            g_level=self.g_level,
            h_level=self.h_level,
        )

    def with_coupling(self, g_eff: complex) -> ReducedParams:
        return replace(self, g_eff=complex(g_eff))

    def to_mhz_dict(self) -> dict[str, Any]:
        """Ordinary-frequency MHz view used by the ``reduce`` command output."""
        out: dict[str, Any] = {}
        for name, value in asdict(self).items():
            if name in ("order_k", "g_level", "h_level"):
                out[name] = value
            elif name == "g_eff":
                out["g_eff_re_MHz"] = angular_to_mhz(value.real)
                out["g_eff_im_MHz"] = angular_to_mhz(value.imag)
                out["g_eff_abs_MHz"] = angular_to_mhz(abs(value))
            else:
                out[f"{name}_MHz"] = angular_to_mhz(value)
        return out
