"""Admissible contour: the unit circle, invariant under tau -> -lambda/tau.

Only the unit circle is supported; it is the unique origin-centred circle
invariant under the involution for both lambda signs, and the branch points of
both monodromy families satisfy |tau0 * tau0~| = 1, so separation is automatic
away from the degenerate locus.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BadLambda, BranchPointNearContour

DEFAULT_BAND = 1e-8
DEFAULT_MARGIN = 0.05


class PointClass(enum.Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"
    ON_CONTOUR = "on_contour"


@dataclass(frozen=True)
class Contour:
    """Unit circle with involution sign lam in {+1, -1}."""

    lam: int
    kind: str = "unit_circle"

    def involution(self, z: complex) -> complex:
        return -self.lam / z

    def classify(self, z: complex, band: float = DEFAULT_BAND) -> PointClass:
        r = abs(z)
        if r < 1.0 - band:
            return PointClass.INTERIOR
        if r > 1.0 + band:
            return PointClass.EXTERIOR
        return PointClass.ON_CONTOUR

    def sample(self, n: int) -> np.ndarray:
        if n < 4:
            raise ValueError("need at least 4 contour samples")
        return np.exp(2j * np.pi * np.arange(n) / n)


def make_contour(lam: int) -> Contour:
    if lam not in (1, -1):
        raise BadLambda(f"involution sign must be +1 or -1, got {lam!r}")
    c = Contour(lam=int(lam))
    # self-check: the involution maps the circle to itself
    pts = c.sample(16)
    images = np.abs(-lam / pts)
    if np.max(np.abs(images - 1.0)) > 1e-12:
        raise BadLambda("involution does not preserve the unit circle")
    return c


def classify_point(c: Contour, z: complex, band: float = DEFAULT_BAND) -> PointClass:
    if band <= 0.0:
        raise ValueError("band must be positive")
    return c.classify(z, band)


def sample(c: Contour, n: int) -> np.ndarray:
    return c.sample(n)


def check_branch_separation(c: Contour, t0: complex, t0tilde: complex,
                            margin: float = DEFAULT_MARGIN) -> None:
    """Require t0 strictly inside and t0tilde strictly outside the margin band."""
    if not 0.0 < margin < 0.5:
        raise ValueError("margin must lie in (0, 0.5)")
    if not (abs(t0) < 1.0 - margin and abs(t0tilde) > 1.0 + margin):
        raise BranchPointNearContour(
            f"branch points |t0|={abs(t0):.6g}, |t0~|={abs(t0tilde):.6g} "
            f"violate the separation margin {margin}"
        )
