"""Analytic driven-dissipative rate theory and relaxation fits."""

from mistsim.rates.amplitudes import (
    ConditionalAmplitudes,
    DisplacedElements,
    conditional_amplitudes,
    default_truncation,
    displaced_fock_element,
    displaced_matrix_elements,
)
from mistsim.rates.fitting import FitResult, fit_relaxation
from mistsim.rates.recurrence import (
    RecurrenceCoefficients,
    recurrence_coefficients,
    solve_recurrence,
)
from mistsim.rates.theory import (
    RateResult,
    RateWorkspace,
    initial_state_policy,
    population_estimate,
    transition_rates,
)

__all__ = [
    "ConditionalAmplitudes",
    "DisplacedElements",
    "FitResult",
    "RateResult",
    "RateWorkspace",
    "RecurrenceCoefficients",
    "conditional_amplitudes",
    "default_truncation",
    "displaced_fock_element",
    "displaced_matrix_elements",
    "fit_relaxation",
    "initial_state_policy",
    "population_estimate",
    "recurrence_coefficients",
    "solve_recurrence",
    "transition_rates",
]
