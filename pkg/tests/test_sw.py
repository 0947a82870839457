"""Tests for the normal-ordered algebra and the Schrieffer-Wolff expansion."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mistsim.core.exceptions import (
    BasisMismatchError,
    ConvergenceError,
    ParameterError,
    ResonanceError,
)
from mistsim.core.types import BasisTag
from mistsim.core.units import ghz_to_angular
from mistsim.operators import DensityMatrix, basis_state
from mistsim.spectrum import FluxoniumSpec, QubitSpectrum, diagonalize
from mistsim.sw import (
    NormalOrdered,
    ReducedParams,
    check_dispersive,
    check_two_photon,
    converge_level_count,
    dressing_unitary,
    expand,
    first_order_generator,
    generator_residual,
    lab_frame_state,
    reduced_to_lab,
    rwa_validity_report,
    second_order_params,
    third_order_coupling,
    two_photon_coupling,
)


def _random_qubit_matrix(rng: np.random.Generator, levels: int) -> np.ndarray:
    return rng.normal(size=(levels, levels)) + 1j * rng.normal(size=(levels, levels))


class TestNormalOrdered:
    """Tests for products and reordering of normal-ordered operators."""

    def test_canonical_commutator(self) -> None:
        """Test [a, a†] = 1."""
        one = np.ones((1, 1), dtype=complex)
        a = NormalOrdered.from_mapping(1, {(0, 1): one})
        adag = NormalOrdered.from_mapping(1, {(1, 0): one})

        product = a @ adag
        commutator = a.commutator(adag).pruned()

        assert product[(1, 1)][0, 0] == 1.0
        assert product[(0, 0)][0, 0] == 1.0
        assert commutator.channels() == [(0, 0)]
        assert commutator[(0, 0)][0, 0] == 1.0

    def test_reordering_weights(self) -> None:
        """Test a² (a†)² = (a†)² a² + 4 a†a + 2."""
        one = np.ones((1, 1), dtype=complex)
        product = NormalOrdered.from_mapping(1, {(0, 2): one}) @ NormalOrdered.from_mapping(
            1, {(2, 0): one}
        )

        assert product[(2, 2)][0, 0] == 1.0
        assert product[(1, 1)][0, 0] == 4.0
        assert product[(0, 0)][0, 0] == 2.0

    def test_dimension_mismatch(self) -> None:
        """Test that qubit dimensions must agree."""
        left = NormalOrdered.from_mapping(2, {(0, 0): np.eye(2)})
        right = NormalOrdered.from_mapping(3, {(0, 0): np.eye(3)})

        with pytest.raises(BasisMismatchError):
            _ = left @ right

    def test_dag_is_involution(self) -> None:
        """Test that taking the adjoint twice returns the operator."""
        rng = np.random.default_rng(1)
        op = NormalOrdered.from_mapping(
            3, {(1, 0): _random_qubit_matrix(rng, 3), (2, 1): _random_qubit_matrix(rng, 3)}
        )

        assert op.dag().dag().max_deviation(op) == 0.0
        assert op.dag().channels() == [(0, 1), (1, 2)]

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        left=st.sampled_from([(1, 0), (0, 1), (1, 1), (2, 0)]),
        right=st.sampled_from([(1, 0), (0, 1), (0, 2), (1, 1)]),
    )
    def test_product_matches_matrices(
        self, seed: int, left: tuple[int, int], right: tuple[int, int]
    ) -> None:
        """Test that the normal-ordered product agrees with truncated matrices away from the edge."""
        rng = np.random.default_rng(seed)
        levels, photons = 2, 12
        x = NormalOrdered.from_mapping(levels, {left: _random_qubit_matrix(rng, levels)})
        y = NormalOrdered.from_mapping(levels, {right: _random_qubit_matrix(rng, levels)})

        exact = (x @ y).joint_matrix(photons)
        truncated = x.joint_matrix(photons) @ y.joint_matrix(photons)

        # rows and columns with photon index below photons - 2 are unaffected by the cut
        keep = np.array([q * photons + n for q in range(levels) for n in range(photons - 2)])
        assert np.allclose(exact[np.ix_(keep, keep)], truncated[np.ix_(keep, keep)])


class TestFirstOrder:
    """Tests for the first-order generator."""

    def test_generator_solves_commutator(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test [S1, H0] = -V1 on the truncated joint space."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)

        assert generator_residual(sw, photon_levels=10) < 1e-10

    def test_generator_elements(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test <i|S_10|j> = -i g n_ij / (omega_ij - omega_r) and S_01 = -S_10†."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)
        s10 = sw.generators[1][(1, 0)]
        s01 = sw.generators[1][(0, 1)]
        w = synthetic_spectrum.transitions()
        n = synthetic_spectrum.n_matrix

        assert s10[0, 3] == pytest.approx(-1j * coupling * n[0, 3] / (w[0, 3] - omega_r))
        assert np.allclose(s01, -s10.conj().T)

    def test_near_resonance_raises(self, synthetic_spectrum: QubitSpectrum, coupling: float) -> None:
        """Test that a transition at the resonator frequency is refused."""
        with pytest.raises(ResonanceError) as exc_info:
            check_dispersive(synthetic_spectrum, coupling, synthetic_spectrum.transition(1, 2))

        assert set(exc_info.value.levels) == {1, 2}


class TestExpansion:
    """Tests for the higher-order recursion."""

    def test_order_range(self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float) -> None:
        """Test that only orders 1 to 3 are supported."""
        with pytest.raises(ParameterError):
            expand(synthetic_spectrum, coupling, omega_r, order=4)

    def test_symmetries(self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float) -> None:
        """Test S† = -S and V† = V at every order."""
        sw = expand(synthetic_spectrum, coupling, omega_r, order=3)

        assert set(sw.interactions) == {1, 2, 3}
        assert sw.symmetry_deviation() < 1e-12

    def test_second_order_shifts_match_sums(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that the diagonal of V2 reproduces the closed-form chi and Lambda."""
        sw = expand(synthetic_spectrum, coupling, omega_r, order=2)
        v2 = sw.interactions[2]
        params = second_order_params(
            synthetic_spectrum, coupling, omega_r, omega_r, 0.0, 0.0, g_level=0, h_level=3
        )

        assert v2[(1, 1)][0, 0].real == pytest.approx(params.chi_g, rel=1e-10)
        assert v2[(1, 1)][3, 3].real == pytest.approx(params.chi_h, rel=1e-10)
        assert v2[(0, 0)][0, 0].real == pytest.approx(params.lambda_g, rel=1e-10)
        assert v2[(0, 0)][3, 3].real == pytest.approx(params.lambda_h, rel=1e-10)

    def test_two_photon_coupling_matches_v2(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test g_eff = <g|V_20|h>."""
        sw = expand(synthetic_spectrum, coupling, omega_r, order=2)
        g_eff = two_photon_coupling(synthetic_spectrum, coupling, omega_r, 0, 3)

        assert abs(g_eff) > 0
        assert sw.interactions[2][(2, 0)][0, 3] == pytest.approx(g_eff, rel=1e-10)

    def test_second_order_params_frame(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test the rotating-frame detunings of the reduced parameters."""
        omega_d = omega_r - 0.01
        params = second_order_params(
            synthetic_spectrum, coupling, omega_r, omega_d, 0.05, 0.025, g_level=0, h_level=3
        )

        assert params.order_k == 2
        assert params.delta_a == pytest.approx(0.01)
        assert params.delta_h == pytest.approx(
            synthetic_spectrum.omega[3] + params.lambda_h - 2 * omega_d
        )
        assert params.delta_q == pytest.approx(params.delta_h - params.delta_g)

    def test_resonant_entry_is_retained(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that a declared resonant entry stays in V2 instead of entering S2."""
        sw = expand(synthetic_spectrum, coupling, omega_r, order=3, resonant=[(2, 0, 0, 3)])

        assert sw.generators[2][(2, 0)][0, 3] == 0.0
        assert sw.retained[2][(2, 0)][0, 3] == pytest.approx(sw.interactions[2][(2, 0)][0, 3])

    def test_recursion_sign_option(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that the two third-order recursions differ."""
        corrected = expand(synthetic_spectrum, coupling, omega_r, order=3)
        printed = expand(synthetic_spectrum, coupling, omega_r, order=3, printed_recursion=True)

        assert corrected.interactions[3].max_deviation(printed.interactions[3]) > 0


class TestThirdOrder:
    """Tests for the three-photon coupling."""

    def test_scales_as_g_cubed(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test g³ scaling of the closed-form coupling."""
        small = third_order_coupling(synthetic_spectrum, coupling, omega_r, 1, 4)
        large = third_order_coupling(synthetic_spectrum, 2 * coupling, omega_r, 1, 4)

        assert abs(small) > 0
        assert large == pytest.approx(8 * small, rel=1e-12)

    def test_two_photon_precondition(self, synthetic_spectrum: QubitSpectrum, coupling: float) -> None:
        """Test that a nearby two-photon resonance blocks the three-photon reduction."""
        # level 3 exactly on the two-photon line of the ground state
        omega_r = 0.5 * synthetic_spectrum.omega[3] + 1e-6

        with pytest.raises(ResonanceError) as exc_info:
            check_two_photon(synthetic_spectrum, coupling, omega_r, level=0)

        assert exc_info.value.levels == (0, 3)

    def test_levels_must_be_distinct(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test level validation."""
        with pytest.raises(ParameterError):
            third_order_coupling(synthetic_spectrum, coupling, omega_r, 2, 2)


class TestFrames:
    """Tests for the dressed/lab frame maps."""

    def test_dressing_is_unitary(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that exp(-S) is unitary."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)
        u = dressing_unitary(sw, 8)

        assert np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12)

    def test_lab_frame_state(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test the relabeling and the small admixture of other levels."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)
        dressed = basis_state((5, 8), (0, 0), BasisTag.DRESSED_ROTATING)

        lab = lab_frame_state(sw, dressed)

        assert lab.basis_tag == BasisTag.BARE_LAB
        assert lab.norm == pytest.approx(1.0)
        assert 0.99 < abs(lab.amplitudes[0]) ** 2 < 1.0

    def test_lab_frame_state_requires_dressed(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that a lab state cannot be mapped again."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)

        with pytest.raises(BasisMismatchError):
            lab_frame_state(sw, basis_state((5, 8), (0, 0), BasisTag.BARE_LAB))

    def test_reduced_to_lab(
        self,
        synthetic_spectrum: QubitSpectrum,
        coupling: float,
        omega_r: float,
        reduced_params: ReducedParams,
    ) -> None:
        """Test that the embedded state keeps its trace and lands on the right levels."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)
        rho = DensityMatrix.from_state(basis_state((2, 6), (1, 0), BasisTag.REDUCED_ROTATING))

        lab = reduced_to_lab(sw, rho, 0, 3, 2, reduced_params.omega_d, t_ns=12.5)

        assert lab.dims == (5, 6)
        assert lab.basis_tag == BasisTag.BARE_LAB
        assert lab.trace == pytest.approx(1.0)
        populations = np.real(np.diag(lab.matrix)).reshape(5, 6).sum(axis=1)
        assert populations[3] > 0.99

    def test_reduced_to_lab_rejects_lab_state(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test the frame check of reduced_to_lab."""
        sw = first_order_generator(synthetic_spectrum, coupling, omega_r)
        rho = DensityMatrix.from_state(basis_state((2, 6), (0, 0), BasisTag.BARE_LAB))

        with pytest.raises(BasisMismatchError):
            reduced_to_lab(sw, rho, 0, 3, 2, omega_r, t_ns=0.0)


class TestValidity:
    """Tests for the RWA validity report."""

    def test_weak_coupling_passes(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that the synthetic device satisfies every margin."""
        report = rwa_validity_report(synthetic_spectrum, coupling, omega_r, omega_r, 0.05, 0.025)

        assert report.ok
        assert set(report.worst()) == {"dispersive", "drive_sideband", "dissipator"}

    def test_strong_coupling_flags_pairs(
        self, synthetic_spectrum: QubitSpectrum, coupling: float, omega_r: float
    ) -> None:
        """Test that a large coupling raises dispersive flags."""
        report = rwa_validity_report(synthetic_spectrum, 200 * coupling, omega_r, omega_r, 0.0, 0.0)

        assert not report.ok
        assert any(flag.ratio == "dispersive" for flag in report.flags)
        assert report.to_dict()["flags"]


class TestLevelConvergence:
    """Tests for converge_level_count on the reference fluxonium."""

    @pytest.fixture
    def device(self) -> tuple[FluxoniumSpec, float, float]:
        spec = FluxoniumSpec(E_C=0.795, E_L=0.89, E_J=4.43, phi_ext=0.01, ho_truncation=150)
        return spec, ghz_to_angular(0.098), ghz_to_angular(5.9436)

    def test_settles_above_start(self, device: tuple[FluxoniumSpec, float, float]) -> None:
        """Test that the returned spectrum keeps g_eff stable against two more levels."""
        spec, g, omega_r = device

        spectrum = converge_level_count(spec, g, omega_r, 0, 3, start=8, tolerance=1e-2)

        assert 8 <= spectrum.level_count <= 150 // 4
        wider = diagonalize(spec, spectrum.level_count + 2)
        current = two_photon_coupling(spectrum, g, omega_r, 0, 3)
        assert abs(two_photon_coupling(wider, g, omega_r, 0, 3) - current) < 1e-2 * abs(current)

    def test_start_beyond_basis_cap(self, device: tuple[FluxoniumSpec, float, float]) -> None:
        """Test that the oscillator basis bounds the starting level count."""
        spec, g, omega_r = device

        with pytest.raises(ParameterError, match="ho_truncation"):
            converge_level_count(replace(spec, ho_truncation=28), g, omega_r, start=8)

    def test_unreachable_tolerance(self, device: tuple[FluxoniumSpec, float, float]) -> None:
        """Test that running out of levels is a convergence error."""
        spec, g, omega_r = device

        with pytest.raises(ConvergenceError):
            converge_level_count(replace(spec, ho_truncation=40), g, omega_r, start=8, tolerance=0.0)
