"""Canonical Wiener-Hopf factorisation of symmetric 2x2 rational matrix
functions on the unit circle, with an application pipeline that reconstructs
stationary axisymmetric vacuum metrics from monodromy matrices."""

from .contour import Contour, PointClass, check_branch_separation, classify_point, make_contour, sample
from .errors import (
    BadConfig,
    BadLambda,
    BranchPointNearContour,
    DegenerateBranch,
    NonCanonical,
    NonConvergence,
    NonZeroWinding,
    NotSymmetric,
    PathTooCoarse,
    PoleOnContour,
    PrecondViolation,
    QuotientUnboundedAtInfinity,
    R2SystemSingular,
    ResidualPole,
    UnboundedAtInfinity,
    UnsupportedMultiplicity,
    WhfactError,
    ZeroDenominator,
    ZeroEntry,
    ZeroOnContour,
)
from .gravity import (
    MetricFields,
    MonodromySpec,
    PointSolution,
    SpectralPoint,
    axis_matrix,
    blaschke_factors,
    branch_points,
    conformal_psi,
    field_residual,
    lpath,
    metric_delta,
    metric_fields,
    solve_point,
    spectral_curve,
    spectral_substitute,
    twist_B,
)
from .ratfun import (
    CPoly,
    CRational,
    RootCluster,
    compose_poly_rational,
    poly_derivative,
    poly_divmod,
    poly_eval,
    poly_roots,
    rat_arith,
    rat_eval_infinity,
    rat_normalize,
)
from .rhsolve import ColumnPair, RationalMatrix2, dplus_pole_polynomial, kernel_dimension, solve_columns
from .scalarfac import ScalarFactorization, scalar_canonical_factorize, winding_number
from .symfact import (
    Factorization,
    SymmetricData,
    VerificationReport,
    assemble_R2_system,
    assemble_and_verify,
    build_second_columns,
    classify_r1_zeros,
    compute_r1,
    diag_quotient,
    factorize,
    solve_r2,
)

__version__ = "1.0.0"
