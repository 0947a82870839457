"""
Recursive Schrieffer-Wolff expansion of the capacitively coupled qubit-resonator.

H_qr = H_q + ω_r a†a + V with V = i g n (a† − a). The generator of order p removes every
non-diagonal component of V^(p):

    <i|S^(p)_nm|j> = −<i|V^(p)_nm|j> / (ω_ij − (n − m) ω_r),    ω_ij = ω_j − ω_i

and the interaction at the next orders follows from the Baker-Campbell-Hausdorff series:

    V^(2) = ½[S^(1), V^(1)]
    V^(3) = ½[S^(2), V^(1)] + ⅙[S^(1), V^(2)] + ½[S^(1), V^(2)_d]
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from mistsim.core.exceptions import ConvergenceError, ParameterError, ResonanceError
from mistsim.core.logging import get_logger
from mistsim.core.types import ComplexArray
from mistsim.spectrum.fluxonium import FluxoniumSpec, QubitSpectrum, diagonalize
from mistsim.sw.algebra import NormalOrdered
from mistsim.sw.params import ReducedParams

logger = get_logger("sw")

DEFAULT_MARGIN = 0.1
MAX_ORDER = 3
# Denominators below this fraction of ω_r are treated as exact resonances
_RESONANCE_FLOOR = 1e-12

ResonantEntry = tuple[int, int, int, int]


@dataclass(frozen=True, eq=False)
class SWExpansion:
    """
    Generators S^(p) and interactions V^(p) up to ``order``.

    ``retained[p]`` is the part of V^(p) that the generator of order p leaves in place
    (qubit-diagonal number-conserving entries and any entries declared resonant).
    """

    order: int
    spectrum: QubitSpectrum
    g: float
    omega_r: float
    generators: dict[int, NormalOrdered] = field(default_factory=dict)
    interactions: dict[int, NormalOrdered] = field(default_factory=dict)
    retained: dict[int, NormalOrdered] = field(default_factory=dict)

    @property
    def generator_components(self) -> dict[tuple[int, int, int], ComplexArray]:
        return {
            (p, n, m): op[(n, m)] for p, op in self.generators.items() for n, m in op.channels()
        }

    @property
    def interaction_components(self) -> dict[tuple[int, int, int], ComplexArray]:
        return {
            (p, n, m): op[(n, m)] for p, op in self.interactions.items() for n, m in op.channels()
        }

    def symmetry_deviation(self) -> float:
        """Largest violation of S† = −S and V† = V over every stored order."""
        worst = 0.0
        for op in self.generators.values():
            worst = max(worst, op.dag().max_deviation(op * -1.0))
        for op in self.interactions.values():
            worst = max(worst, op.dag().max_deviation(op))
        return worst


def first_order_interaction(spectrum: QubitSpectrum, g: float) -> NormalOrdered:
    """V^(1) = i g n a† − i g n a."""
    n = spectrum.n_matrix
    return NormalOrdered(spectrum.level_count, {(1, 0): 1j * g * n, (0, 1): -1j * g * n})


def check_dispersive(
    spectrum: QubitSpectrum, g: float, omega_r: float, margin: float = DEFAULT_MARGIN
) -> None:
    """
    Raise ResonanceError if any pair violates |g n_ij| < margin · |ω_ij − ω_r|.
    """
    coupling = np.abs(g * spectrum.n_matrix)
    detuning = np.abs(spectrum.transitions() - omega_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(coupling > 0, coupling / detuning, 0.0)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    worst = float(ratio[i, j])
    if worst >= margin:
        raise ResonanceError(
            "single-photon transition too close to the resonator",
            levels=(int(i), int(j)),
            ratio=worst,
            details={"margin": margin},
        )


def _solve_generator(
    interaction: NormalOrdered,
    spectrum: QubitSpectrum,
    omega_r: float,
    resonant: frozenset[ResonantEntry],
) -> tuple[NormalOrdered, NormalOrdered]:
    """Split V into (S, V_retained) with [S, H_0] = −(V − V_retained)."""
    transitions = spectrum.transitions()
    levels = spectrum.level_count
    generator: dict[tuple[int, int], ComplexArray] = {}
    retained: dict[tuple[int, int], ComplexArray] = {}
    floor = _RESONANCE_FLOOR * max(abs(omega_r), 1.0)

    for n, m in interaction.channels():
        values = interaction[(n, m)]
        keep = np.zeros((levels, levels), dtype=bool)
        if n == m:
            np.fill_diagonal(keep, True)
        for rn, rm, ri, rj in resonant:
            if (rn, rm) == (n, m):
                keep[ri, rj] = True
            if (rm, rn) == (n, m):
                keep[rj, ri] = True

        denominator = transitions - (n - m) * omega_r
        eliminate = ~keep & (np.abs(values) > 0)
        near = eliminate & (np.abs(denominator) <= floor)
        if np.any(near):
            i, j = (int(x) for x in np.argwhere(near)[0])
            raise ResonanceError(
                "vanishing generator denominator",
                levels=(i, j),
                details={"channel": (n, m), "denominator": float(denominator[i, j])},
            )

        safe = np.where(eliminate, denominator, 1.0)
        generator[(n, m)] = np.where(eliminate, -values / safe, 0.0)
        if np.any(keep):
            retained[(n, m)] = np.where(keep, values, 0.0)

    return NormalOrdered(levels, generator), NormalOrdered(levels, retained)


def first_order_generator(
    spectrum: QubitSpectrum, g: float, omega_r: float, margin: float = DEFAULT_MARGIN
) -> SWExpansion:
    """
    First-order generator.

    <i|S_10|j> = −i g n_ij / (ω_ij − ω_r) and S_01 = −S_10†.

    Raises:
        ResonanceError: a pair (i, j) violates the generalized dispersive condition
    """
    check_dispersive(spectrum, g, omega_r, margin)
    v1 = first_order_interaction(spectrum, g)
    s1, r1 = _solve_generator(v1, spectrum, omega_r, frozenset())
    return SWExpansion(
        order=1,
        spectrum=spectrum,
        g=g,
        omega_r=omega_r,
        generators={1: s1},
        interactions={1: v1},
        retained={1: r1},
    )


def expand(
    spectrum: QubitSpectrum,
    g: float,
    omega_r: float,
    order: int,
    resonant: Iterable[ResonantEntry] = (),
    margin: float = DEFAULT_MARGIN,
    printed_recursion: bool = False,
) -> SWExpansion:
    """
    Run the recursion up to ``order`` (1 to 3).

    Args:
        resonant: Entries (n, m, i, j) of V^(2) that are kept instead of eliminated, e.g.
            (2, 0, g, h) when the expansion targets a two-photon resonance. Their Hermitian
            partners are kept automatically.
        printed_recursion: Use −⅙[S^(1), V^(2)] in the third-order recursion instead of +⅙
    """
    if not 1 <= order <= MAX_ORDER:
        raise ParameterError("order must be between 1 and 3", details={"order": order})
    result = first_order_generator(spectrum, g, omega_r, margin)
    if order == 1:
        return result

    s1 = result.generators[1]
    v1 = result.interactions[1]
    v2 = (s1.commutator(v1) * 0.5).pruned()
    generators = {1: s1}
    interactions = {1: v1, 2: v2}
    retained = dict(result.retained)

    if order == 3:
        s2, r2 = _solve_generator(v2, spectrum, omega_r, frozenset(resonant))
        retained[2] = r2
        generators[2] = s2
        middle = -1.0 / 6.0 if printed_recursion else 1.0 / 6.0
        v3 = (
            s2.commutator(v1) * 0.5
            + s1.commutator(v2) * middle
            + s1.commutator(r2) * 0.5
        ).pruned()
        interactions[3] = v3

    return SWExpansion(
        order=order,
        spectrum=spectrum,
        g=g,
        omega_r=omega_r,
        generators=generators,
        interactions=interactions,
        retained=retained,
    )


def _second_order_shifts(
    spectrum: QubitSpectrum, g: float, omega_r: float, level: int
) -> tuple[float, float]:
    """(χ_i, Λ_i) from the explicit sums over intermediate states k."""
    weights = np.abs(spectrum.n_matrix[level, :]) ** 2
    omega_ki = spectrum.omega - spectrum.omega[level]
    lorentz = omega_ki**2 - omega_r**2
    shift = omega_ki - omega_r
    active = weights > 0
    if np.any(active & ((np.abs(lorentz) == 0) | (np.abs(shift) == 0))):
        k = int(np.argwhere(active & ((lorentz == 0) | (shift == 0)))[0, 0])
        raise ResonanceError("vanishing second-order denominator", levels=(level, k))
    safe_lorentz = np.where(active, lorentz, 1.0)
    safe_shift = np.where(active, shift, 1.0)
    chi = g**2 * float(np.sum(np.where(active, weights * 2.0 * omega_ki / safe_lorentz, 0.0)))
    lamb = g**2 * float(np.sum(np.where(active, weights / safe_shift, 0.0)))
    return chi, lamb


def two_photon_coupling(
    spectrum: QubitSpectrum, g: float, omega_r: float, g_level: int, h_level: int
) -> complex:
    """<g|V_20|h> = g²/2 Σ_k n_gk n_kh (1/(ω_gk − ω_r) − 1/(ω_kh − ω_r))."""
    n = spectrum.n_matrix
    omega = spectrum.omega
    total = 0.0 + 0.0j
    for k in range(spectrum.level_count):
        chain = n[g_level, k] * n[k, h_level]
        if chain == 0:
            continue
        d_gk = omega[k] - omega[g_level] - omega_r
        d_kh = omega[h_level] - omega[k] - omega_r
        if d_gk == 0 or d_kh == 0:
            raise ResonanceError("vanishing two-photon denominator", levels=(g_level, k, h_level))
        total += chain * (1.0 / d_gk - 1.0 / d_kh)
    return complex(0.5 * g**2 * total)


def second_order_params(
    spectrum: QubitSpectrum,
    g: float,
    omega_r: float,
    omega_d: float,
    epsilon_d: float,
    kappa: float,
    g_level: int = 0,
    h_level: int = 3,
    margin: float = DEFAULT_MARGIN,
) -> ReducedParams:
    """
    Second-order reduced parameters for a two-photon resonance between g_level and h_level.

    χ_i = g² Σ_k |n_ik|² 2ω_ki/(ω_ki² − ω_r²), Λ_i = g² Σ_k |n_ik|²/(ω_ki − ω_r) and
    g_eff = <g|V_20|h>, with sums over every level in ``spectrum``.
    """
    _check_levels(spectrum, g_level, h_level)
    check_dispersive(spectrum, g, omega_r, margin)
    chi_g, lambda_g = _second_order_shifts(spectrum, g, omega_r, g_level)
    chi_h, lambda_h = _second_order_shifts(spectrum, g, omega_r, h_level)
    g_eff = two_photon_coupling(spectrum, g, omega_r, g_level, h_level)
    return ReducedParams.from_frequencies(
        omega_r=omega_r,
        omega_d=omega_d,
        omega_g=float(spectrum.omega[g_level]),
        omega_h=float(spectrum.omega[h_level]),
        chi_g=chi_g,
        chi_h=chi_h,
        lambda_g=lambda_g,
        lambda_h=lambda_h,
        g_eff=g_eff,
        order_k=2,
        kappa=kappa,
        epsilon_d=epsilon_d,
        g_level=g_level,
        h_level=h_level,
    )


def check_two_photon(
    spectrum: QubitSpectrum,
    g: float,
    omega_r: float,
    level: int,
    margin: float = DEFAULT_MARGIN,
) -> None:
    """
    Raise ResonanceError if ``level`` has a two-photon partner j with
    |<level|V_20|j>| ≥ margin · |ω_level,j − 2ω_r|.
    """
    for j in range(spectrum.level_count):
        if j == level:
            continue
        coupling = abs(two_photon_coupling(spectrum, g, omega_r, level, j))
        if coupling == 0.0:
            continue
        detuning = abs(spectrum.transition(level, j) - 2.0 * omega_r)
        if coupling >= margin * detuning:
            raise ResonanceError(
                "a two-photon resonance precedes the three-photon one",
                levels=(level, j),
                ratio=coupling / detuning if detuning else float("inf"),
                details={"margin": margin},
            )


def _check_levels(spectrum: QubitSpectrum, *levels: int) -> None:
    if any(not 0 <= level < spectrum.level_count for level in levels) or len(set(levels)) != len(
        levels
    ):
        raise ParameterError(
            "qubit levels must be distinct and inside the spectrum",
            details={"levels": levels, "level_count": spectrum.level_count},
        )


def third_order_coupling(
    spectrum: QubitSpectrum,
    g: float,
    omega_r: float,
    g_level: int,
    j_level: int,
    printed: bool = False,
    margin: float = DEFAULT_MARGIN,
) -> complex:
    """
    <g|V_30|j> as a double sum over intermediate levels (k, ell) with chain n_gk n_k,ell n_ell,j.

    The default weights follow the third-order recursion; ``printed=True`` evaluates the
    alternative weighting quoted alongside the −⅙ recursion.

    Raises:
        ResonanceError: single-photon precondition fails, or a denominator of a contributing
            chain vanishes (names the (g, k, ell) triple)
    """
    _check_levels(spectrum, g_level, j_level)
    check_dispersive(spectrum, g, omega_r, margin)
    check_two_photon(spectrum, g, omega_r, g_level, margin)
    n = spectrum.n_matrix
    w = spectrum.transitions()
    d1 = w - omega_r
    d2 = w - 2.0 * omega_r
    i, j = g_level, j_level
    size = spectrum.level_count
    floor = _RESONANCE_FLOOR * max(abs(omega_r), 1.0)

    total = 0.0 + 0.0j
    for k in range(size):
        for ell in range(size):
            chain = n[i, k] * n[k, ell] * n[ell, j]
            if chain == 0:
                continue
            if printed:
                denominators = (w[ell, i] - 2.0 * omega_r, d1[ell, j], d1[i, k], d2[k, j], d1[k, ell])
            else:
                denominators = (d1[i, k], d1[k, ell], d1[ell, j], d2[i, ell], d2[k, j])
            if min(abs(d) for d in denominators) <= floor:
                raise ResonanceError("vanishing third-order denominator", levels=(i, k, ell))

            if printed:
                weight = -(0.5 / (w[ell, i] - 2.0 * omega_r) + (1.0 / 6.0) / d1[ell, j]) * (
                    1.0 / d1[i, k] - 1.0 / d1[ell, j]
                ) + (0.5 / d2[k, j] + (1.0 / 6.0) / d1[i, k]) * (1.0 / d1[k, ell] - 1.0 / d1[ell, j])
            else:
                weight = -(1.0 / d1[i, k] - 1.0 / d1[k, ell]) * (
                    0.25 / d2[i, ell] - (1.0 / 12.0) / d1[ell, j]
                ) + (1.0 / d1[k, ell] - 1.0 / d1[ell, j]) * (0.25 / d2[k, j] - (1.0 / 12.0) / d1[i, k])
            total += chain * weight
    return complex(1j * g**3 * total)


def third_order_params(
    spectrum: QubitSpectrum,
    g: float,
    omega_r: float,
    omega_d: float,
    epsilon_d: float,
    kappa: float,
    g_level: int,
    j_level: int,
    printed: bool = False,
    margin: float = DEFAULT_MARGIN,
) -> ReducedParams:
    """Reduced parameters for a three-photon resonance; shifts stay at second order."""
    base = second_order_params(
        spectrum, g, omega_r, omega_d, epsilon_d, kappa, g_level, j_level, margin
    )
    g3 = third_order_coupling(spectrum, g, omega_r, g_level, j_level, printed, margin)
    return ReducedParams.from_frequencies(
        omega_r=omega_r,
        omega_d=omega_d,
        omega_g=base.omega_g,
        omega_h=base.omega_h,
        chi_g=base.chi_g,
        chi_h=base.chi_h,
        lambda_g=base.lambda_g,
        lambda_h=base.lambda_h,
        g_eff=g3,
        order_k=3,
        kappa=kappa,
        epsilon_d=epsilon_d,
        g_level=g_level,
        h_level=j_level,
    )


def converge_level_count(
    spec: FluxoniumSpec,
    g: float,
    omega_r: float,
    g_level: int = 0,
    h_level: int = 3,
    start: int = 8,
    tolerance: float = 1e-3,
    step: int = 2,
) -> QubitSpectrum:
    """
    Add intermediate levels until g_eff changes by less than ``tolerance`` (relative).

    Raises:
        ConvergenceError: the HO truncation caps the level count before convergence
    """
    cap = spec.ho_truncation // 4
    count = max(start, h_level + 1)
    if count > cap:
        raise ParameterError(
            "ho_truncation too small for the requested intermediate levels",
            details={"levels": count, "cap": cap},
        )
    spectrum = diagonalize(spec, count)
    previous = two_photon_coupling(spectrum, g, omega_r, g_level, h_level)
    while count + step <= cap:
        count += step
        candidate = diagonalize(spec, count)
        current = two_photon_coupling(candidate, g, omega_r, g_level, h_level)
        change = abs(current - previous) / max(abs(current), 1e-300)
        if change < tolerance:
            logger.debug(f"Intermediate-state sum converged at {count - step} levels")
            return spectrum
        spectrum, previous = candidate, current
        logger.info(f"Extended intermediate levels to {count} (g_eff change {change:.2e})")
    raise ConvergenceError(
        "intermediate-state sum did not converge within the HO truncation",
        details={"levels": count, "tolerance": tolerance},
    )
