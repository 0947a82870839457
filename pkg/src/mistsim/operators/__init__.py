"""Labeled operators, Lindblad evolution and steady states."""

from mistsim.operators.labeled import (
    DEFAULT_DENSE_CUTOFF,
    DensityMatrix,
    LabeledOperator,
    StateVector,
    basis_state,
    coherent_amplitudes,
    destroy,
    embed,
    expectation,
    number,
    partial_trace,
    projector,
    tensor,
)
from mistsim.operators.lindblad import (
    StepperConfig,
    evolve_density_matrix,
    lindblad_rhs,
    make_time_grid,
    norm_bound,
)
from mistsim.operators.steady import steady_state, vectorized_liouvillian

__all__ = [
    "DEFAULT_DENSE_CUTOFF",
    "DensityMatrix",
    "LabeledOperator",
    "StateVector",
    "StepperConfig",
    "basis_state",
    "coherent_amplitudes",
    "destroy",
    "embed",
    "evolve_density_matrix",
    "expectation",
    "lindblad_rhs",
    "make_time_grid",
    "norm_bound",
    "number",
    "partial_trace",
    "projector",
    "steady_state",
    "tensor",
    "vectorized_liouvillian",
]
