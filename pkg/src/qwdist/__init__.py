"""Quantum Wasserstein-1 distances between qudit states and unitary operations."""

from .ascent import AscentOptions, AscentResult, DifferenceMap, maximize
from .budget import (
    BudgetReport,
    Povm,
    example1_povm,
    example1_scenario,
    is_local_product,
    povm_bound,
    sequence_bound,
    tolerance_budget,
)
from .distance import DistanceEstimate, catalog_distance, d_single_qudit, d_unitary, smallest_arc
from .gates import GateId, NotInCatalog, gate_matrix, match_catalog, parse_gate, permutation4_table
from .linalg import (
    NumericError,
    QuditRegister,
    embed_identity,
    haar_random_state,
    haar_random_unitary,
    partial_trace,
    reduced_marginals,
    trace_norm,
)
from .noise import (
    ErrorRateReport,
    NoiseChannel,
    average_gate_fidelity_reference,
    cost_lower_bounds,
    w1_error_rate,
)
from .properties import property_suite
from .w1 import (
    SolverOptions,
    W1Certificate,
    classical_w1_hamming,
    marginal_lower_bound,
    verify_certificate,
    w1_distance_states,
    w1_norm,
)
from .witness import witness_controlled_phase

__all__ = [
    "AscentOptions",
    "AscentResult",
    "BudgetReport",
    "DifferenceMap",
    "DistanceEstimate",
    "ErrorRateReport",
    "GateId",
    "NoiseChannel",
    "NotInCatalog",
    "NumericError",
    "Povm",
    "QuditRegister",
    "SolverOptions",
    "W1Certificate",
    "average_gate_fidelity_reference",
    "catalog_distance",
    "classical_w1_hamming",
    "cost_lower_bounds",
    "d_single_qudit",
    "d_unitary",
    "embed_identity",
    "example1_povm",
    "example1_scenario",
    "gate_matrix",
    "haar_random_state",
    "haar_random_unitary",
    "is_local_product",
    "marginal_lower_bound",
    "match_catalog",
    "maximize",
    "parse_gate",
    "partial_trace",
    "permutation4_table",
    "povm_bound",
    "property_suite",
    "reduced_marginals",
    "sequence_bound",
    "smallest_arc",
    "tolerance_budget",
    "trace_norm",
    "verify_certificate",
    "w1_distance_states",
    "w1_error_rate",
    "w1_norm",
    "witness_controlled_phase",
]
