import json
from pathlib import Path

import numpy as np
import pytest

from mistsim.core.units import ghz_to_angular
from mistsim.spectrum import QubitSpectrum
from mistsim.sw import ReducedParams

# Level frequencies (GHz) of a small synthetic qubit, far from any single-photon resonance
# with a 5.9 GHz resonator; level 3 sits 0.5 GHz above the two-photon line.
SYNTHETIC_LEVELS_GHZ = (0.0, 0.25, 4.1, 12.3, 13.9)
SYNTHETIC_OMEGA_R_GHZ = 5.9
SYNTHETIC_G_GHZ = 0.05


def synthetic_n_matrix(levels: int) -> np.ndarray:
    """Hermitian, purely imaginary charge matrix with a zero diagonal."""
    n = np.zeros((levels, levels), dtype=complex)
    for i in range(levels):
        for j in range(i + 1, levels):
            n[i, j] = -0.3j / (1.0 + 0.5 * (j - i - 1)) * (1.0 + 0.1 * i)
            n[j, i] = np.conj(n[i, j])
    return n


@pytest.fixture
def synthetic_spectrum() -> QubitSpectrum:
    """Five-level spectrum with every off-diagonal charge element nonzero."""
    omega = np.array([ghz_to_angular(f) for f in SYNTHETIC_LEVELS_GHZ])
    return QubitSpectrum(omega=omega, n_matrix=synthetic_n_matrix(len(omega)))


@pytest.fixture
def omega_r() -> float:
    return ghz_to_angular(SYNTHETIC_OMEGA_R_GHZ)


@pytest.fixture
def coupling() -> float:
    return ghz_to_angular(SYNTHETIC_G_GHZ)


@pytest.fixture
def reduced_params() -> ReducedParams:
    """Two-photon reduced model in the bad-cavity regime, resonant drive, no drive amplitude."""
    omega_d = ghz_to_angular(6.0)
    return ReducedParams.from_frequencies(
        omega_r=omega_d,
        omega_d=omega_d,
        omega_g=0.0,
        omega_h=2.0 * omega_d + 0.01,
        chi_g=-0.002,
        chi_h=0.004,
        lambda_g=0.001,
        lambda_h=-0.003,
        g_eff=0.002,
        order_k=2,
        kappa=0.025,
        epsilon_d=0.0,
    )


@pytest.fixture
def scenario_data() -> dict:
    """The shipped reference device with a single drive amplitude and small truncations."""
    return {
        "qubit": {"E_C_GHz": 0.795, "E_L_GHz": 0.89, "E_J_GHz": 4.43, "phi_ext": 0.01},
        "circuit": {
            "omega_r_GHz": 5.9436,
            "omega_d_GHz": 5.9436,
            "g_GHz": 0.098,
            "kappa_MHz": 4.086,
            "epsilon_d_MHz": 5.0,
        },
        "resonance": {"k": 2, "g_level": 0, "level_count": 8},
        "truncations": {"n_max": 40, "j_max": 4, "ho_truncation": 100},
        "run": {"t_end_us": 0.1, "dt_ns": 2.5, "models": ["reduced"], "seed": 7},
    }


@pytest.fixture
def scenario_file(tmp_path: Path, scenario_data: dict) -> Path:
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario_data), encoding="utf-8")
    return path
