"""Shifted eigenvector models for centrality and occupancy in urban networks."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DisconnectedNetworkError,
    InfeasibleModelError,
    NetworkError,
    RankDeficiencyError,
    ReducibleMatrixError,
    SingularSystemError,
    StructuralError,
    UrbanCentralityError,
)
from .netgraph import (
    DistanceMatrix,
    RelationshipMatrix,
    UrbanNetwork,
    apply_weights,
    build_adjacency,
    build_gravity,
    build_harmonic,
    build_matrix,
    is_irreducible,
    shortest_path_distances,
)
from .spectral import PerronPair, eigen_centrality, normalize_to_unit_radius, perron_pair, spectral_radius
from .shifted import Classification, ShiftedModel, Verdict, calibrate_mu, classify, solve_shifted
from .fitting import FitResult, SnapshotSet, fit_joint, fit_weights_known_f, goodness_of_fit, stack_joint, stack_known_f
from .sensitivity import (
    EigenModel,
    Parameter,
    SensitivityReport,
    derivative_shifted,
    derivative_unshifted,
    elasticity,
    finite_difference_check,
    full_report,
    lambda_prime,
    parse_parameter,
)
from .inverse import InverseProblem, is_fully_indecomposable, scaling_law_check, solve_inverse
from .kernels import BACKEND as KERNEL_BACKEND
