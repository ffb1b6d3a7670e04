"""Exception hierarchy shared by all whfact modules.

Every failure mode that callers are expected to branch on gets its own class;
the CLI maps them onto process exit codes (see cli.EXIT_CODES).
"""


class WhfactError(Exception):
    """Base class for all whfact errors."""


class NonConvergence(WhfactError):
    """Iterative root finder exhausted its iteration cap."""


class ZeroDenominator(WhfactError):
    """Division by an identically-zero polynomial or rational function."""


class BadLambda(WhfactError):
    """Involution sign must be +1 or -1."""


class BranchPointNearContour(WhfactError):
    """A spectral branch point sits inside the contour safety margin."""


class ZeroOnContour(WhfactError):
    """A root or pole falls on the contour band where a split is required."""


class NonZeroWinding(WhfactError):
    """Scalar function has nonzero winding; no canonical factorisation."""


class NonCanonical(WhfactError):
    """The matrix does not admit a canonical factorisation (singular or
    inconsistent linear system for the factor columns)."""


class R2SystemSingular(NonCanonical):
    """The linear system for the second-column numerator is singular."""


class PrecondViolation(WhfactError):
    """A documented precondition of the solver does not hold."""


class NotSymmetric(WhfactError):
    """Matrix marked symmetric has entry(1,2) != entry(2,1)."""


class QuotientUnboundedAtInfinity(WhfactError):
    """Diagonal quotient a/d grows at infinity."""


class PoleOnContour(WhfactError):
    """Diagonal quotient has a pole on the contour band."""


class UnsupportedMultiplicity(WhfactError):
    """r1 has a zero of order >= 3; out of scope."""


class ResidualPole(WhfactError):
    """An analytic cancellation failed numerically (tolerance breakdown)."""


class DegenerateBranch(WhfactError):
    """Branch points too close to the contour for the given (rho, v)."""


class UnboundedAtInfinity(WhfactError):
    """Minus factor entry has no finite limit at infinity."""


class ZeroEntry(WhfactError):
    """Axis matrix entry required to be nonzero vanishes."""


class PathTooCoarse(WhfactError):
    """Quadrature refinement cap reached without convergence."""


class BadConfig(WhfactError):
    """Malformed or non-conforming run configuration."""
