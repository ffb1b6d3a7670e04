"""Canonical Wiener-Hopf factorisation of scalar rational functions.

A scalar r with zero winding about the contour splits as r = minus * plus,
where plus and 1/plus are analytic inside (all roots/poles exterior), minus
and 1/minus are analytic outside including infinity (all roots/poles interior,
degree-balanced), and plus(0) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .contour import Contour, PointClass, DEFAULT_BAND
from .errors import NonZeroWinding, ZeroOnContour
from .ratfun import CPoly, CRational, RootCluster


@dataclass(frozen=True)
class ScalarFactorization:
    minus: CRational
    plus: CRational
    winding: int


def _split_clusters(clusters, c: Contour, band: float):
    interior, exterior = [], []
    for cl in clusters:
        side = c.classify(cl.location, band)
        if side is PointClass.ON_CONTOUR:
            raise ZeroOnContour(
                f"root/pole cluster at {cl.location:.12g} lies on the contour band"
            )
        (interior if side is PointClass.INTERIOR else exterior).append(cl)
    return interior, exterior


def winding_number(r: CRational, c: Contour, band: float = DEFAULT_BAND) -> int:
    """Interior zero count minus interior pole count, with multiplicity."""
    zi, _ = _split_clusters(r.zeros(), c, band)
    pi, _ = _split_clusters(r.poles(), c, band)
    return sum(cl.multiplicity for cl in zi) - sum(cl.multiplicity for cl in pi)


def scalar_canonical_factorize(r: CRational, c: Contour,
                               band: float = DEFAULT_BAND) -> ScalarFactorization:
    if r.is_zero:
        raise ZeroOnContour("cannot factorise the zero function")
    zi, ze = _split_clusters(r.zeros(), c, band)
    pi, pe = _split_clusters(r.poles(), c, band)
    w = sum(cl.multiplicity for cl in zi) - sum(cl.multiplicity for cl in pi)
    if w != 0:
        raise NonZeroWinding(f"winding number {w} != 0: no canonical factorisation")

    lead = r.num.lead  # den is monic, so this is the overall scale
    plus_num = CPoly.from_clusters(ze)
    plus_den = CPoly.from_clusters(pe)
    alpha = plus_num(0.0) / plus_den(0.0)  # nonzero: all roots exterior
    plus = CRational(plus_num * (1.0 / alpha), plus_den)

    minus_num = CPoly.from_clusters(zi) * (lead * alpha)
    minus_den = CPoly.from_clusters(pi)
    minus = CRational(minus_num, minus_den)
    return ScalarFactorization(minus=minus, plus=plus, winding=0)
