"""Schrieffer-Wolff reduction of the qubit-resonator Hamiltonian."""

from mistsim.sw.algebra import NormalOrdered
from mistsim.sw.expansion import (
    DEFAULT_MARGIN,
    SWExpansion,
    check_dispersive,
    check_two_photon,
    converge_level_count,
    expand,
    first_order_generator,
    first_order_interaction,
    second_order_params,
    third_order_coupling,
    third_order_params,
    two_photon_coupling,
)
from mistsim.sw.frames import (
    dressing_unitary,
    generator_residual,
    joint_operator,
    lab_frame_state,
    reduced_to_lab,
)
from mistsim.sw.params import ReducedParams
from mistsim.sw.validity import ValidityFlag, ValidityReport, rwa_validity_report

__all__ = [
    "DEFAULT_MARGIN",
    "NormalOrdered",
    "ReducedParams",
    "SWExpansion",
    "ValidityFlag",
    "ValidityReport",
    "check_dispersive",
    "check_two_photon",
    "converge_level_count",
    "dressing_unitary",
    "expand",
    "first_order_generator",
    "first_order_interaction",
    "generator_residual",
    "joint_operator",
    "lab_frame_state",
    "reduced_to_lab",
    "rwa_validity_report",
    "second_order_params",
    "third_order_coupling",
    "third_order_params",
    "two_photon_coupling",
]
