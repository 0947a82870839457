"""Qubit spectrum: fluxonium Hamiltonian, diagonalization and resonance search."""

from mistsim.spectrum.fluxonium import (
    DispersiveLimit,
    FluxoniumSpec,
    QubitSpectrum,
    build_fluxonium_hamiltonian,
    diagonalize,
    dispersive_limit,
    find_multiphoton_resonance,
    phase_and_charge_operators,
)

__all__ = [
    "DispersiveLimit",
    "FluxoniumSpec",
    "QubitSpectrum",
    "build_fluxonium_hamiltonian",
    "diagonalize",
    "dispersive_limit",
    "find_multiphoton_resonance",
    "phase_and_charge_operators",
]
