"""Schatten Finsler geometry on positive definite matrices.

Distances, geodesics and midpoint inequalities for the cone of positive
definite complex matrices under Schatten exponents strictly between 1 and
infinity; circumcenters of bounded group orbits and the positive
unitarizers they produce; commutant analysis with invariant subspaces; and
the order sets, polar duals and rigidity checks attached to inner-product,
max and pushforward norms.
"""

from .action import (
    CircumcenterConfig,
    CircumcenterResult,
    CommutantAnalysis,
    GroupPresentation,
    InvariantSubspaceResult,
    Orbit,
    OrbitBoundConstants,
    UnitarizationResult,
    UnitarizeConfig,
    circumcenter,
    commutant_analysis,
    commutant_basis,
    defect_domination_check,
    displacement,
    fixed_point_check,
    invariant_subspace,
    orbit_ball,
    orbit_bound_constants,
    unitarize,
)
from .exceptions import (
    BudgetError,
    ConditioningError,
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    ExponentError,
    HermitianityError,
    NotPositiveDefiniteError,
    PreconditionError,
    SchattenGeoError,
    UnboundedOrbitError,
    ValidationError,
)
from .manifold import (
    BusemannConstants,
    MarginRecord,
    PDPoint,
    TangentVector,
    busemann_margin,
    cartan_symmetry,
    distance,
    emi_margin,
    exp_map,
    ext_group_defect,
    finsler_norm,
    geodesic,
    group_act,
    log_map,
    normalize_pair,
)
from .norms import (
    HilbertNorm,
    IsometryCheck,
    IsometryUnitarization,
    MaxHilbertNorm,
    MembershipVerdict,
    NormSpec,
    PolarDualResult,
    PolarityReport,
    PushforwardNorm,
    RigidityReport,
    ScalarSandwich,
    change_of_variables,
    cminus_membership,
    cplus_membership,
    form_convexity_margin,
    form_geodesic,
    is_isometry,
    norm_eval,
    normalize_to_standard,
    polar_dual_eval,
    polar_duality_check,
    pullback_form,
    rigidity_check,
    scalar_sandwich,
    unitarize_isometries,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "BusemannConstants",
    "ConditioningError",
    "ConvergenceError",
    "CircumcenterConfig",
    "CircumcenterResult",
    "CommutantAnalysis",
    "DimensionMismatchError",
    "DomainError",
    "ExponentError",
    "GroupPresentation",
    "HermitianityError",
    "HilbertNorm",
    "InvariantSubspaceResult",
    "IsometryCheck",
    "IsometryUnitarization",
    "MarginRecord",
    "MaxHilbertNorm",
    "MembershipVerdict",
    "NormSpec",
    "NotPositiveDefiniteError",
    "Orbit",
    "OrbitBoundConstants",
    "PDPoint",
    "PolarDualResult",
    "PolarityReport",
    "PreconditionError",
    "PushforwardNorm",
    "RigidityReport",
    "ScalarSandwich",
    "SchattenGeoError",
    "TangentVector",
    "UnboundedOrbitError",
    "UnitarizationResult",
    "UnitarizeConfig",
    "ValidationError",
    "busemann_margin",
    "cartan_symmetry",
    "change_of_variables",
    "circumcenter",
    "cminus_membership",
    "commutant_analysis",
    "commutant_basis",
    "cplus_membership",
    "defect_domination_check",
    "displacement",
    "distance",
    "emi_margin",
    "exp_map",
    "ext_group_defect",
    "finsler_norm",
    "fixed_point_check",
    "form_convexity_margin",
    "form_geodesic",
    "geodesic",
    "group_act",
    "invariant_subspace",
    "is_isometry",
    "log_map",
    "norm_eval",
    "normalize_pair",
    "normalize_to_standard",
    "orbit_ball",
    "orbit_bound_constants",
    "polar_dual_eval",
    "polar_duality_check",
    "pullback_form",
    "rigidity_check",
    "scalar_sandwich",
    "unitarize",
    "unitarize_isometries",
]
