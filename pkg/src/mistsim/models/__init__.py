"""Time-evolution models: full, reduced and semiclassical."""

from mistsim.models.full import (
    BareObservables,
    FullSystem,
    JumpRecord,
    TrajectoryEnsemble,
    bare_observables,
    hamiltonian_at,
    master_equation_evolve,
    monte_carlo_evolve,
    trajectory_policy,
)
from mistsim.models.reduced import (
    DEFAULT_N_MAX,
    MIN_N_MAX,
    ReducedObservables,
    ReducedSystem,
    ScanPoint,
    ScanResult,
    build_reduced_system,
    evolve_reduced,
    extract_relaxation,
    observables_of,
    required_photon_truncation,
    steady_observables,
    steady_scan,
)
from mistsim.models.semiclassical import (
    PRODUCT_STATE_NEGATIVITY,
    SemiclassicalState,
    evolve_semiclassical,
    evolve_semiclassical_sweep,
    semiclassical_rhs,
)

__all__ = [
    "DEFAULT_N_MAX",
    "MIN_N_MAX",
    "PRODUCT_STATE_NEGATIVITY",
    "BareObservables",
    "FullSystem",
    "JumpRecord",
    "ReducedObservables",
    "ReducedSystem",
    "ScanPoint",
    "ScanResult",
    "SemiclassicalState",
    "TrajectoryEnsemble",
    "bare_observables",
    "build_reduced_system",
    "evolve_reduced",
    "evolve_semiclassical",
    "evolve_semiclassical_sweep",
    "extract_relaxation",
    "hamiltonian_at",
    "master_equation_evolve",
    "monte_carlo_evolve",
    "observables_of",
    "required_photon_truncation",
    "semiclassical_rhs",
    "steady_observables",
    "steady_scan",
    "trajectory_policy",
]
