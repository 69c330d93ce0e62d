"""Finite-dimensional engine for the fibre-bundle formulation of
nonrelativistic quantum dynamics.

The Hilbert-space picture (states, Hamiltonians, propagators) is carried
into a bundle picture by a frame field: states become sections, the
propagator becomes a fibre-to-fibre transport, and the Schroedinger
equation becomes the vanishing of a derivation along the time path.
"""

from .checks import CHECKS, DEFAULT_TOLERANCES, applicable_checks, run_scenario
from .evolution import (
    HamiltonianSpec,
    MatrixHamiltonian,
    Propagator,
    hamiltonian_from_propagator,
    matrix_hamiltonian,
    propagate,
    solve_schrodinger,
)
from .frames import (
    BasisDrift,
    FibreMetric,
    FrameField,
    GaugeTransform,
    fibre_metric,
    flat_transport,
    frame_logarithmic_derivative,
    transform_operator,
    transform_two_point,
    transform_vector,
)
from .linalg import (
    DimensionMismatchError,
    LinalgError,
    NonFiniteError,
    SingularMatrixError,
    adjoint,
    commutator,
    eigenvalues,
    hermitian_eigenvalues,
    inverse,
    is_hermitian,
    mat_exp,
    max_norm,
    solve,
)
from .observables import (
    MorphismAlongPath,
    ObservableSpec,
    expectation_bundle,
    expectation_hilbert,
    lift_commutator,
    lift_function,
    lift_observable,
    metric_adjoint,
    morphism_derivation,
    morphism_time_derivative,
    two_time_morphism,
    two_time_morphism_flat,
)
from .report import CheckEntry, Report, TrajectoryRow, report_to_csv, report_to_json
from .scenario import (
    RuntimeScenario,
    ScenarioError,
    ScenarioModel,
    build_runtime,
    load_scenario,
)
from .transport import (
    BundleHamiltonianMatrix,
    BundleTransport,
    StateSection,
    TransportCoefficients,
    bundle_schrodinger_residual,
    bundle_transport,
    central_identity_residual,
    derive_along_path,
    gauge_transform_bundle_hamiltonian,
    gauge_transform_coefficients,
    heisenberg_gauge,
    matrix_bundle_hamiltonian,
    transport_coefficients,
)
from .verify import SUITES, verify_suite

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # linalg
    "LinalgError",
    "DimensionMismatchError",
    "SingularMatrixError",
    "NonFiniteError",
    "adjoint",
    "commutator",
    "eigenvalues",
    "hermitian_eigenvalues",
    "inverse",
    "is_hermitian",
    "mat_exp",
    "max_norm",
    "solve",
    # frames
    "FrameField",
    "BasisDrift",
    "GaugeTransform",
    "FibreMetric",
    "fibre_metric",
    "flat_transport",
    "frame_logarithmic_derivative",
    "transform_vector",
    "transform_operator",
    "transform_two_point",
    # evolution
    "HamiltonianSpec",
    "MatrixHamiltonian",
    "Propagator",
    "matrix_hamiltonian",
    "propagate",
    "solve_schrodinger",
    "hamiltonian_from_propagator",
    # transport
    "BundleTransport",
    "TransportCoefficients",
    "BundleHamiltonianMatrix",
    "StateSection",
    "bundle_transport",
    "matrix_bundle_hamiltonian",
    "transport_coefficients",
    "central_identity_residual",
    "derive_along_path",
    "bundle_schrodinger_residual",
    "gauge_transform_coefficients",
    "gauge_transform_bundle_hamiltonian",
    "heisenberg_gauge",
    # observables
    "ObservableSpec",
    "MorphismAlongPath",
    "lift_observable",
    "expectation_hilbert",
    "expectation_bundle",
    "metric_adjoint",
    "morphism_time_derivative",
    "lift_function",
    "lift_commutator",
    "two_time_morphism",
    "two_time_morphism_flat",
    "morphism_derivation",
    # scenario / checks / report / verify
    "ScenarioError",
    "ScenarioModel",
    "RuntimeScenario",
    "build_runtime",
    "load_scenario",
    "CHECKS",
    "DEFAULT_TOLERANCES",
    "applicable_checks",
    "run_scenario",
    "CheckEntry",
    "TrajectoryRow",
    "Report",
    "report_to_json",
    "report_to_csv",
    "SUITES",
    "verify_suite",
]
