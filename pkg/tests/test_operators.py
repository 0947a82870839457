"""Tests for labeled operators, Lindblad evolution and the steady-state solver."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mistsim.core.events import NumericalEventType
from mistsim.core.exceptions import (
    BasisMismatchError,
    ParameterError,
    StepInstabilityError,
    SteadyStateError,
)
from mistsim.core.types import BasisTag
from mistsim.operators import (
    DensityMatrix,
    LabeledOperator,
    StepperConfig,
    basis_state,
    coherent_amplitudes,
    destroy,
    embed,
    evolve_density_matrix,
    expectation,
    lindblad_rhs,
    make_time_grid,
    number,
    partial_trace,
    steady_state,
    tensor,
    vectorized_liouvillian,
)

BARE = BasisTag.BARE_LAB


def _cavity(size: int, detuning: float, drive: float) -> LabeledOperator:
    a = destroy(size)
    return LabeledOperator.create(detuning * number(size) + drive * (a + a.conj().T), (size,), BARE)


class TestLabeledOperator:
    """Tests for LabeledOperator and its storage policy."""

    def test_shape_must_match_dims(self) -> None:
        """Test that the matrix shape follows the dims."""
        with pytest.raises(BasisMismatchError):
            LabeledOperator(np.eye(4, dtype=complex), (2, 3), BARE)

    def test_mixed_basis_tags_rejected(self) -> None:
        """Test that operators in different frames cannot be combined."""
        lab = LabeledOperator.create(np.eye(2, dtype=complex), (2,), BARE)
        dressed = LabeledOperator.create(np.eye(2, dtype=complex), (2,), BasisTag.DRESSED_ROTATING)

        with pytest.raises(BasisMismatchError, match="basis tags differ"):
            _ = lab + dressed

    def test_sparse_above_cutoff(self) -> None:
        """Test dense storage up to the cutoff and sparse above it."""
        small = tensor(np.eye(2, dtype=complex), number(4), basis_tag=BARE, dense_cutoff=8)
        large = tensor(np.eye(2, dtype=complex), number(5), basis_tag=BARE, dense_cutoff=8)

        assert not small.is_sparse
        assert large.is_sparse
        assert np.allclose(large.dense()[:5, :5], number(5))

    def test_embed_matches_kron(self) -> None:
        """Test that embed lifts a local operator with identities."""
        a = destroy(4)
        lifted = embed(a, 1, (3, 4), BARE)

        assert np.allclose(lifted.dense(), np.kron(np.eye(3), a))

    def test_hermitian_check(self) -> None:
        """Test is_hermitian on the drive quadrature and the ladder operator."""
        a = destroy(6)
        assert LabeledOperator.create(1j * (a.conj().T - a), (6,), BARE).is_hermitian()
        assert not LabeledOperator.create(a, (6,), BARE).is_hermitian()


class TestStates:
    """Tests for state vectors and density matrices."""

    def test_basis_state_index(self) -> None:
        """Test the row-major product index."""
        psi = basis_state((3, 5), (1, 2), BARE)

        assert psi.amplitudes[1 * 5 + 2] == 1.0
        assert psi.norm == pytest.approx(1.0)

    def test_basis_state_out_of_range(self) -> None:
        """Test that indices outside the dims are rejected."""
        with pytest.raises(ParameterError):
            basis_state((2, 3), (2, 0), BARE)

    def test_coherent_photon_number(self) -> None:
        """Test that a coherent state carries |alpha|^2 photons."""
        alpha = 1.5 - 0.5j
        amplitudes = coherent_amplitudes(40, alpha)
        photons = float(np.sum(np.arange(40) * np.abs(amplitudes) ** 2))

        assert np.linalg.norm(amplitudes) == pytest.approx(1.0)
        assert photons == pytest.approx(abs(alpha) ** 2, rel=1e-10)

    def test_density_matrix_properties(self) -> None:
        """Test trace, purity and positivity of a pure state."""
        rho = DensityMatrix.from_state(basis_state((2, 3), (1, 0), BARE))

        assert rho.trace == pytest.approx(1.0)
        assert rho.purity() == pytest.approx(1.0)
        assert rho.min_eigenvalue() == pytest.approx(0.0, abs=1e-12)

    def test_partial_trace_of_product(self) -> None:
        """Test that tracing out one factor of a product state returns the other."""
        psi = basis_state((2, 3), (1, 2), BARE)
        rho = DensityMatrix.from_state(psi)

        qubit = partial_trace(rho, 0)
        cavity = partial_trace(rho, 1)

        assert qubit.dims == (2,)
        assert np.allclose(qubit.matrix, np.diag([0, 1]))
        assert np.allclose(cavity.matrix, np.diag([0, 0, 1]))

    def test_expectation(self) -> None:
        """Test expectation values for vectors and density matrices."""
        psi = basis_state((4,), (3,), BARE)
        n = LabeledOperator.create(number(4), (4,), BARE)

        assert expectation(psi, n) == pytest.approx(3.0)
        assert expectation(DensityMatrix.from_state(psi), n) == pytest.approx(3.0)


class TestLindblad:
    """Tests for the Lindblad right-hand side and RK4 evolution."""

    def test_time_grid(self) -> None:
        """Test the inclusive uniform grid."""
        grid = make_time_grid(10.0, 2.5)

        assert np.allclose(grid, [0.0, 2.5, 5.0, 7.5, 10.0])
        with pytest.raises(ParameterError):
            make_time_grid(-1.0)

    def test_rhs_is_traceless(self) -> None:
        """Test that the generator preserves the trace."""
        size = 6
        h = _cavity(size, 0.3, 0.2)
        loss = LabeledOperator.create(destroy(size), (size,), BARE)
        rho = DensityMatrix.from_state(basis_state((size,), (2,), BARE))

        drho = lindblad_rhs(h, [(0.5, loss)], rho)

        assert abs(np.trace(drho)) < 1e-12
        assert np.allclose(drho, drho.conj().T)

    def test_rhs_rejects_other_frame(self) -> None:
        """Test that rho must share the Hamiltonian's frame."""
        h = _cavity(4, 0.1, 0.0)
        rho = DensityMatrix(np.diag([1, 0, 0, 0]).astype(complex), (4,), BasisTag.DRESSED_ROTATING)

        with pytest.raises(BasisMismatchError):
            lindblad_rhs(h, [], rho)

    def test_photon_decay(self) -> None:
        """Test that one photon decays as exp(-kappa t)."""
        size, kappa = 4, 0.2
        h = _cavity(size, 0.0, 0.0)
        loss = LabeledOperator.create(destroy(size), (size,), BARE)
        rho0 = DensityMatrix.from_state(basis_state((size,), (1,), BARE))
        photons = LabeledOperator.create(number(size), (size,), BARE)

        series = evolve_density_matrix(
            rho0,
            h,
            [(kappa, loss)],
            make_time_grid(10.0, 0.5),
            StepperConfig(dt_ns=0.5, max_phase_per_step=0.1),
            observables={"n": photons},
        )

        assert np.allclose(series["n"], np.exp(-kappa * series.t_ns), atol=1e-7)
        assert series.events == []

    def test_evolution_is_reproducible(self) -> None:
        """Test that two runs are bit-identical."""
        size = 8
        h = _cavity(size, 0.5, 0.3)
        loss = LabeledOperator.create(destroy(size), (size,), BARE)
        rho0 = DensityMatrix.from_state(basis_state((size,), (0,), BARE))
        grid = make_time_grid(5.0, 0.5)

        first = evolve_density_matrix(rho0, h, [(0.4, loss)], grid, keep_snapshots=True)
        second = evolve_density_matrix(rho0, h, [(0.4, loss)], grid, keep_snapshots=True)

        assert first.snapshots is not None and second.snapshots is not None
        assert all(np.array_equal(a, b) for a, b in zip(first.snapshots, second.snapshots))

    def test_time_dependent_hamiltonian(self) -> None:
        """Test a Rabi flip driven by a callable Hamiltonian."""
        rabi = 0.5
        sx = np.array([[0, 1], [1, 0]], dtype=complex)

        def h(t: float) -> LabeledOperator:
            return LabeledOperator.create(0.5 * rabi * sx, (2,), BARE)

        rho0 = DensityMatrix.from_state(basis_state((2,), (0,), BARE))
        excited = LabeledOperator.create(np.diag([0, 1]).astype(complex), (2,), BARE)
        series = evolve_density_matrix(
            rho0, h, [], make_time_grid(4.0, 0.1), StepperConfig(dt_ns=0.01), observables={"p1": excited}
        )

        assert np.allclose(series["p1"], np.sin(0.5 * rabi * series.t_ns) ** 2, atol=1e-8)

    def test_unstable_run_aborts(self) -> None:
        """Test that a trace-breaking generator raises StepInstabilityError."""
        size = 3
        # a non-Hermitian term drains the trace
        h = LabeledOperator(-1j * np.eye(size, dtype=complex), (size,), BARE)
        rho0 = DensityMatrix.from_state(basis_state((size,), (0,), BARE))

        with pytest.raises(StepInstabilityError) as exc_info:
            evolve_density_matrix(rho0, h, [], make_time_grid(1.0, 0.1))

        assert exc_info.value.drift > 1e-4

    def test_grid_must_start_at_zero(self) -> None:
        """Test grid validation."""
        h = _cavity(3, 0.0, 0.0)
        rho0 = DensityMatrix.from_state(basis_state((3,), (0,), BARE))

        with pytest.raises(ParameterError):
            evolve_density_matrix(rho0, h, [], np.array([1.0, 2.0]))


class TestVectorizedLiouvillian:
    """The matrix-free generator against the column-stacking superoperator."""

    @pytest.mark.property
    @settings(max_examples=100, deadline=None)
    @given(
        size=st.integers(min_value=1, max_value=8),
        jump_count=st.integers(min_value=0, max_value=2),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_rhs_matches_superoperator(self, size: int, jump_count: int, seed: int) -> None:
        """Test vec(dρ/dt) == L vec(ρ) for random H, collapse operators and ρ."""
        rng = np.random.default_rng(seed)

        def random_matrix() -> np.ndarray:
            return rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))

        raw = random_matrix()
        h = LabeledOperator.create(0.5 * (raw + raw.conj().T), (size,), BARE)
        collapse = [
            (float(rng.uniform(0.0, 1.0)), LabeledOperator.create(random_matrix(), (size,), BARE))
            for _ in range(jump_count)
        ]
        g = random_matrix()
        rho_matrix = g @ g.conj().T
        rho = DensityMatrix(rho_matrix / np.trace(rho_matrix).real, (size,), BARE)

        matrix_free = lindblad_rhs(h, collapse, rho).reshape(-1, order="F")
        stacked = vectorized_liouvillian(h, collapse) @ rho.matrix.reshape(-1, order="F")

        assert np.allclose(matrix_free, stacked, rtol=0.0, atol=1e-12)

    def test_trace_row_is_zero(self) -> None:
        """Test that the superoperator annihilates the trace functional."""
        size = 4
        h = _cavity(size, 0.2, 0.1)
        loss = LabeledOperator.create(destroy(size), (size,), BARE)
        trace_functional = np.eye(size, dtype=complex).reshape(-1, order="F")

        liouvillian = vectorized_liouvillian(h, [(0.7, loss)]).toarray()

        assert np.allclose(trace_functional @ liouvillian, 0.0, atol=1e-12)


class TestSteadyState:
    """Tests for the sparse steady-state solver."""

    def test_driven_damped_cavity(self) -> None:
        """Test the coherent steady state alpha = -eps / (delta - i kappa / 2)."""
        size, delta, eps, kappa = 15, 0.5, 0.1, 1.0
        h = _cavity(size, delta, eps)
        loss = LabeledOperator.create(destroy(size), (size,), BARE)

        rho = steady_state(h, [(kappa, loss)])
        alpha = -eps / (delta - 0.5j * kappa)
        a = LabeledOperator.create(destroy(size), (size,), BARE)

        assert rho.trace == pytest.approx(1.0)
        assert expectation(rho, a) == pytest.approx(alpha, abs=1e-8)
        assert rho.purity() == pytest.approx(1.0, abs=1e-8)

    def test_non_unique_kernel(self) -> None:
        """Test that a Liouvillian without dissipation has no unique steady state."""
        h = _cavity(4, 0.3, 0.0)

        with pytest.raises(SteadyStateError):
            steady_state(h, [])

    def test_dimension_cap(self) -> None:
        """Test that oversized problems are refused."""
        h = _cavity(10, 0.1, 0.1)

        with pytest.raises(ParameterError, match="steady-state cap"):
            steady_state(h, [], cap=5)


class TestTraceRenormalization:
    """Tests for the corrective renormalization event."""

    def test_renormalization_is_recorded(self) -> None:
        """Test that a small trace drift is renormalized and logged as an event."""
        size = 3
        h = LabeledOperator(-1e-6j * np.eye(size, dtype=complex), (size,), BARE)
        rho0 = DensityMatrix.from_state(basis_state((size,), (0,), BARE))

        series = evolve_density_matrix(
            rho0,
            h,
            [],
            make_time_grid(1.0, 0.5),
            StepperConfig(dt_ns=0.5, renorm_tolerance=1e-7, abort_tolerance=1e-4),
        )

        assert series.events
        assert series.events[0].type == NumericalEventType.TRACE_RENORMALIZED
