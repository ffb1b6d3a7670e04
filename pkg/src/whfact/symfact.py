"""Second factor columns of a symmetric matrix and full assembly/verification.

For a symmetric M with diagonal quotient q = p1/p2, the second columns of
X^-1 and M- follow from the first columns through two rational functions with
denominator p2:

    r1 = delta+ * (q*f1+^2 - f2+^2) = ptilde1/p2,
    s+ = r1^-1 (r2*I + J*Q2) f+,     s- = r1^-1 (r2*I + J*Q1) f-,

where the numerator polynomial R2 of r2 = R2/p2 is fixed by one linear
condition per zero of ptilde1 (two for a double zero), the boundedness of s-
at infinity, and the normalisation s1+(0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import Contour, PointClass, DEFAULT_BAND
from .errors import (
    NotSymmetric,
    PoleOnContour,
    QuotientUnboundedAtInfinity,
    R2SystemSingular,
    ResidualPole,
    UnsupportedMultiplicity,
    ZeroOnContour,
)
from .ratfun import (
    CPoly,
    CRational,
    RootCluster,
    over_common_denominator,
    poly_deflate_clusters,
    poly_divmod,
    poly_roots,
    rat_normalize,
    rat_reduced,
)
from .rhsolve import (
    ColumnPair,
    RationalMatrix2,
    _check_unimodular,
    _LinearRows,
    _monomial_times,
    _poly_mag,
    _poly_times_rat,
    solve_columns,
    solve_scaled_lstsq,
)
from .scalarfac import ScalarFactorization

ZERO_COMPONENT_TOL = 1e-9   # case (i)/(ii) vs (iii) decision threshold
RANK_TOL = 1e-9
RESIDUAL_TOL = 1e-8

J = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class SymmetricData:
    """Diagonal quotient q = p1/p2 and the weights it induces."""

    q: CRational
    p1: CPoly
    p2: CPoly

    def q1_at(self, z) -> np.ndarray:
        qz = self.q(z)
        return np.array([[1.0, 0.0], [0.0, -qz]], dtype=complex)

    def q2_at(self, z) -> np.ndarray:
        qz = self.q(z)
        return np.array([[qz, 0.0], [0.0, -1.0]], dtype=complex)


def diag_quotient(m: RationalMatrix2, band: float = DEFAULT_BAND) -> SymmetricData:
    """Normalised q = entry(1,1)/entry(2,2) with the p1-monic convention."""
    if not m.symmetric:
        raise NotSymmetric("matrix is not flagged symmetric")
    q = m.entry(0, 0) / m.entry(1, 1)
    if not q.bounded_at_infinity:
        raise QuotientUnboundedAtInfinity(
            f"a/d has numerator degree {q.num.degree} > denominator degree "
            f"{q.den.degree}"
        )
    for cl in q.poles():
        if abs(abs(cl.location) - 1.0) <= band:
            raise PoleOnContour(f"q has a pole at {cl.location:.12g} on the contour band")
    if q.num.is_zero:
        return SymmetricData(q=q, p1=CPoly.zero(), p2=q.den)
    kappa = q.num.lead
    return SymmetricData(q=q, p1=q.num * (1.0 / kappa), p2=q.den * (1.0 / kappa))


def compute_r1(sd: SymmetricData, delta_plus: CRational, fplus) -> CRational:
    """r1 = delta+ * (q f1+^2 - f2+^2), checked bounded with no contour zeros.

    With the common-denominator form f+ = (U1, U2)/W this is
    delta+ * (p1 U1^2 - p2 U2^2) / (p2 W^2); the W^2 factor divides the core
    polynomial exactly (boundedness of r1), so it is removed by polynomial
    division rather than by re-rooting the product denominators.
    """
    f1, f2 = fplus
    if delta_plus.num.degree == 0 and delta_plus.den.degree == 0:
        scale = complex(delta_plus(0.0))
        u1, u2, w = over_common_denominator(f1, f2)
        t1 = sd.p1 * (u1 * u1)
        t2 = sd.p2 * (u2 * u2)
        wcl = [RootCluster(cl.location, 2 * cl.multiplicity)
               for cl in (poly_roots(w) if w.degree >= 1 else [])]
        core = poly_deflate_clusters(t1 - t2, wcl,
                                     max(_poly_mag(t1), _poly_mag(t2)),
                                     "r1 common-denominator removal")
        r1 = rat_normalize(core * scale, sd.p2)
    else:
        # general delta+ (not exercised by the v1 pipeline, which has det M = 1)
        r1 = delta_plus * (sd.q * f1 * f1 - f2 * f2)
    if r1.is_zero:
        raise ZeroOnContour("r1 vanishes identically; factor columns degenerate")
    if not r1.bounded_at_infinity:
        raise ResidualPole(
            f"r1 numerator degree {r1.num.degree} exceeds denominator degree "
            f"{r1.den.degree}"
        )
    for cl in r1.zeros():
        if abs(abs(cl.location) - 1.0) <= DEFAULT_BAND:
            raise ZeroOnContour(
                f"r1 vanishes at {cl.location:.12g} on the contour band; "
                "deform the contour (out of scope in v1)"
            )
    return r1


def _ptilde1(sd: SymmetricData, r1: CRational) -> CPoly:
    """Numerator of r1 over the exact denominator p2 (degree <= deg p2)."""
    from .ratfun import _prime_roots_cache

    p2m = sd.p2.monic()
    if r1.den.coeffs == p2m.coeffs:
        pt = r1.num * sd.p2.lead
        if r1.num.degree >= 1:
            _prime_roots_cache(pt, poly_roots(r1.num))  # scaling keeps roots
        return pt
    dcl = poly_roots(r1.den) if r1.den.degree >= 1 else []
    quot = poly_deflate_clusters(p2m, dcl, 0.0, "r1 denominator division of p2")
    return r1.num * quot * sd.p2.lead


def _classify_poly_zeros(p: CPoly, c: Contour, band: float):
    interior, exterior = [], []
    if p.degree >= 1:
        for cl in poly_roots(p):
            if cl.multiplicity >= 3:
                raise UnsupportedMultiplicity(
                    f"zero of order {cl.multiplicity} at {cl.location:.12g}; "
                    "only simple and double zeros are supported"
                )
            side = c.classify(cl.location, band)
            if side is PointClass.ON_CONTOUR:
                raise ZeroOnContour(
                    f"zero at {cl.location:.12g} lies on the contour band"
                )
            (interior if side is PointClass.INTERIOR else exterior).append(cl)
    return interior, exterior


def classify_r1_zeros(r1: CRational, c: Contour, band: float = DEFAULT_BAND):
    """Zeros of r1's numerator split into interior/exterior clusters."""
    return _classify_poly_zeros(r1.num, c, band)


@dataclass
class R2System:
    amat: np.ndarray
    rhs: np.ndarray
    p2: CPoly
    nunk: int


def _powers(z: complex, n: int) -> np.ndarray:
    return np.array([z ** k for k in range(n)])


def _dpowers(z: complex, n: int) -> np.ndarray:
    return np.array([0.0 if k == 0 else k * z ** (k - 1) for k in range(n)])


def _coeff(p: CPoly, d: int) -> complex:
    return p.coeffs[d] if d < len(p.coeffs) else 0.0 + 0.0j


def assemble_R2_system(sd: SymmetricData, zeros, cols: ColumnPair,
                       band: float = DEFAULT_BAND) -> R2System:
    """Linear system for the coefficients of R2 (degree <= deg p2)."""
    interior, exterior = zeros
    p1, p2 = sd.p1, sd.p2
    nunk = len(p2.coeffs)  # deg p2 + 1 coefficients
    f1p, f2p = cols.plus
    f1m, f2m = cols.minus
    rows = _LinearRows(nunk)

    def zero_row(z):
        rows.add(_powers(z, nunk), 0.0)

    for cl in interior:
        z, mult = cl.location, cl.multiplicity
        v1, v2 = f1p(z), f2p(z)
        scale = max(abs(v1), abs(v2))
        if scale == 0.0:
            raise ResidualPole(f"both plus components vanish at {z:.12g}")
        small1 = abs(v1) <= ZERO_COMPONENT_TOL * scale
        small2 = abs(v2) <= ZERO_COMPONENT_TOL * scale
        if mult == 1:
            if small1 or small2:
                zero_row(z)
            else:
                rows.add(_powers(z, nunk) * v1, -p2(z) * v2)
        else:
            d1 = f1p.eval_derivative(z)
            d2 = f2p.eval_derivative(z)
            if small2:
                zero_row(z)
                rows.add(_dpowers(z, nunk) * v1, -p2(z) * d2)
            elif small1:
                zero_row(z)
                rows.add(_dpowers(z, nunk) * v2, -p1(z) * d1)
            else:
                rows.add(_powers(z, nunk) * v1, -p2(z) * v2)
                rows.add(
                    _dpowers(z, nunk) * v1 + _powers(z, nunk) * d1,
                    -(p2.derivative()(z) * v2 + p2(z) * d2),
                )

    for cl in exterior:
        z, mult = cl.location, cl.multiplicity
        v1, v2 = f1m(z), f2m(z)
        scale = max(abs(v1), abs(v2))
        if scale == 0.0:
            raise ResidualPole(f"both minus components vanish at {z:.12g}")
        small1 = abs(v1) <= ZERO_COMPONENT_TOL * scale
        small2 = abs(v2) <= ZERO_COMPONENT_TOL * scale
        if mult == 1:
            if small1 or small2:
                zero_row(z)
            else:
                rows.add(_powers(z, nunk) * v1, -p1(z) * v2)
        else:
            d1 = f1m.eval_derivative(z)
            d2 = f2m.eval_derivative(z)
            if small1:
                zero_row(z)
                rows.add(_dpowers(z, nunk) * v2, -p2(z) * d1)
            elif small2:
                zero_row(z)
                rows.add(_dpowers(z, nunk) * v1, -p1(z) * d2)
            else:
                rows.add(_powers(z, nunk) * v1, -p1(z) * v2)
                rows.add(
                    _dpowers(z, nunk) * v1 + _powers(z, nunk) * d1,
                    -(p1.derivative()(z) * v2 + p1(z) * d2),
                )

    # boundedness of s- at infinity (vacuous when deg ptilde1 == deg p2)
    deg_pt = sum(cl.multiplicity for cl in interior + exterior)
    excess = (len(p2.coeffs) - 1) - deg_pt
    if excess > 0:
        u1m, u2m, wm = over_common_denominator(f1m, f2m)
        top = len(wm.coeffs) - 1 + deg_pt
        for unum, uoth, pfac in ((u1m, u2m, p1), (u2m, u1m, p2)):
            max_deg = max((nunk - 1) + max(unum.degree, 0),
                          (pfac * uoth).degree if not (pfac * uoth).is_zero else 0)
            for d in range(top + 1, int(max_deg) + 1):
                row = np.array(
                    [_coeff(_monomial_times(unum, k), d) for k in range(nunk)]
                )
                rows.add(row, -_coeff(pfac * uoth, d))

    # normalisation s1+(0) = 0 after exact division by the interior clusters
    u1, u2, w = over_common_denominator(f1p, f2p)
    g1 = CPoly.from_clusters(interior)
    row = np.array(
        [poly_divmod(_monomial_times(u1, k), g1)[0](0.0) for k in range(nunk)]
    )
    rhs = -poly_divmod(p2 * u2, g1)[0](0.0)
    rows.add(row, rhs)

    amat, rhsv = rows.matrix()
    return R2System(amat=amat, rhs=rhsv, p2=p2, nunk=nunk)


def _solve_r2_coeffs(system: R2System) -> CPoly:
    x = solve_scaled_lstsq(system.amat, system.rhs, system.nunk,
                           R2SystemSingular, "R2")
    return CPoly(tuple(x))


def solve_r2(system: R2System) -> CRational:
    """Unique r2 = R2/p2 solving the assembled system."""
    return rat_normalize(_solve_r2_coeffs(system), system.p2)


def build_second_columns(sd: SymmetricData, r1: CRational, r2: CRational,
                         cols: ColumnPair, c: Contour | None = None,
                         band: float = DEFAULT_BAND) -> ColumnPair:
    """s+/s- from the first columns, with exact interior/exterior division."""
    if c is None:
        c = Contour(lam=1)
    ptilde = _ptilde1(sd, r1)
    interior, exterior = _classify_poly_zeros(ptilde, c, band)
    lead = ptilde.lead
    r2num = _poly_times_rat(sd.p2, r2)

    u1, u2, w = over_common_denominator(*cols.plus)
    u1m, u2m, wm = over_common_denominator(*cols.minus)
    p1, p2 = sd.p1, sd.p2
    wcl = poly_roots(w) if w.degree >= 1 else []
    wmcl = poly_roots(wm) if wm.degree >= 1 else []

    def make(t1: CPoly, t2: CPoly, gcancel, keep_clusters, what: str):
        scale = max(_poly_mag(t1), _poly_mag(t2))
        quot = poly_deflate_clusters(t1 + t2, gcancel, scale, what)
        if scale > 0.0 and _poly_mag(quot) <= 1e-12 * scale:
            return CRational(CPoly.zero(), CPoly.one())
        return rat_reduced(quot, den_scale=lead, den_clusters=keep_clusters)

    s1p = make(r2num * u1, p2 * u2, interior, wcl + exterior, "s1+ cancellation")
    s2p = make(r2num * u2, p1 * u1, interior, wcl + exterior, "s2+ cancellation")
    s1m = make(r2num * u1m, p1 * u2m, exterior, wmcl + interior, "s1- cancellation")
    s2m = make(r2num * u2m, p2 * u1m, exterior, wmcl + interior, "s2- cancellation")

    v0 = np.array([s1p(0.0), s2p(0.0)])
    if abs(v0[0]) > 1e-6 or abs(v0[1] - 1.0) > 1e-6:
        raise ResidualPole(f"s+(0) = {v0}, expected (0, 1)")
    for f in (s1p, s2p):
        for cl in f.poles():
            if c.classify(cl.location, band) is not PointClass.EXTERIOR:
                raise ResidualPole(
                    f"s+ component keeps a non-exterior pole at {cl.location:.12g}"
                )
    for f in (s1m, s2m):
        if not f.bounded_at_infinity:
            raise ResidualPole("s- component unbounded at infinity")
        for cl in f.poles():
            if c.classify(cl.location, band) is not PointClass.INTERIOR:
                raise ResidualPole(
                    f"s- component keeps a non-interior pole at {cl.location:.12g}"
                )
    return ColumnPair(plus=(s1p, s2p), minus=(s1m, s2m))


@dataclass(frozen=True)
class Factorization:
    """Full canonical factorisation bundle M = Mminus * X, X(0) = I."""

    first: ColumnPair
    second: ColumnPair
    r1: CRational
    r2: CRational
    delta: ScalarFactorization
    Xinv: RationalMatrix2
    Mminus: RationalMatrix2
    sd: SymmetricData
    ptilde1: CPoly
    R2: CPoly


def _gauge_fix(first: ColumnPair, second: ColumnPair):
    """Exact normalisation X(0) = I by the column operation [f s] <- [f s] K^-1
    with K = Xinv(0).  A gauge choice: it cannot mask genuine solve error,
    which stays visible in the boundary and identity residuals."""
    k = np.array(
        [[first.plus[0](0.0), second.plus[0](0.0)],
         [first.plus[1](0.0), second.plus[1](0.0)]]
    )
    dev = float(np.abs(k - np.eye(2)).max())
    if dev <= 5e-15:
        return first, second
    if dev > 1e-6:
        raise ResidualPole(f"factor normalisation at 0 broke down: X^-1(0) = {k}")
    kinv = np.linalg.inv(k)

    def mix(cols_a, cols_b, ca, cb):
        out = []
        for fa, fb in zip(cols_a, cols_b):
            term = fa * ca if ca != 0.0 else CRational.zero_fn()
            if cb != 0.0:
                term = term + fb * cb
            out.append(term)
        return tuple(out)

    fp = mix(first.plus, second.plus, kinv[0, 0], kinv[1, 0])
    sp = mix(first.plus, second.plus, kinv[0, 1], kinv[1, 1])
    fm = mix(first.minus, second.minus, kinv[0, 0], kinv[1, 0])
    sm = mix(first.minus, second.minus, kinv[0, 1], kinv[1, 1])
    return ColumnPair(plus=fp, minus=fm), ColumnPair(plus=sp, minus=sm)


def factorize(m: RationalMatrix2, c: Contour, band: float = DEFAULT_BAND) -> Factorization:
    """Run the full pipeline: first columns -> r1 -> R2 system -> second columns."""
    _check_unimodular(m)
    # det M = 1 (v1 restriction) makes the scalar factorisation trivial
    delta = ScalarFactorization(minus=CRational.one(), plus=CRational.one(), winding=0)
    sd = diag_quotient(m, band)
    first = solve_columns(m, c, (1.0, 0.0), band)
    r1 = compute_r1(sd, delta.plus, first.plus)
    ptilde = _ptilde1(sd, r1)
    zeros = _classify_poly_zeros(ptilde, c, band)
    system = assemble_R2_system(sd, zeros, first, band)
    r2coeffs = _solve_r2_coeffs(system)
    r2 = rat_normalize(r2coeffs, sd.p2)
    second = build_second_columns(sd, r1, r2, first, c, band)
    first, second = _gauge_fix(first, second)
    xinv = RationalMatrix2(
        entries=((first.plus[0], second.plus[0]), (first.plus[1], second.plus[1]))
    )
    mminus = RationalMatrix2(
        entries=((first.minus[0], second.minus[0]), (first.minus[1], second.minus[1]))
    )
    return Factorization(
        first=first, second=second, r1=r1, r2=r2, delta=delta,
        Xinv=xinv, Mminus=mminus, sd=sd, ptilde1=ptilde, R2=r2coeffs,
    )


@dataclass(frozen=True)
class VerificationReport:
    """Residuals of every identity the factorisation must satisfy."""

    residuals: dict
    tol: float
    passed: bool

    def worst(self) -> tuple[str, float]:
        k = max(self.residuals, key=lambda kk: self.residuals[kk])
        return k, self.residuals[k]


def _colvec(pair, z) -> np.ndarray:
    return np.array([pair[0](z), pair[1](z)])


def assemble_and_verify(m: RationalMatrix2, fact: Factorization, c: Contour,
                        tol: float = 1e-10, nsamples: int = 256) -> VerificationReport:
    """Residual report: boundary, X(0), determinant/symmetry identities,
    propagation, and both r2 cross-checks."""
    pts = c.sample(nsamples)
    res = {
        "boundary": 0.0,
        "x_at_zero": 0.0,
        "det_identity": 0.0,
        "symmetry_identity": 0.0,
        "propagation": 0.0,
        "r2_cross_plus": 0.0,
        "r2_cross_minus": 0.0,
    }
    x0 = np.array(
        [[fact.Xinv.entry(0, 0)(0.0), fact.Xinv.entry(0, 1)(0.0)],
         [fact.Xinv.entry(1, 0)(0.0), fact.Xinv.entry(1, 1)(0.0)]]
    )
    res["x_at_zero"] = float(np.abs(x0 - np.eye(2)).max())

    dplus, dminus = fact.delta.plus, fact.delta.minus
    for z in pts:
        mz = m.at(z)
        xinv = np.array(
            [[fact.Xinv.entry(0, 0)(z), fact.Xinv.entry(0, 1)(z)],
             [fact.Xinv.entry(1, 0)(z), fact.Xinv.entry(1, 1)(z)]]
        )
        mm = np.array(
            [[fact.Mminus.entry(0, 0)(z), fact.Mminus.entry(0, 1)(z)],
             [fact.Mminus.entry(1, 0)(z), fact.Mminus.entry(1, 1)(z)]]
        )
        res["boundary"] = max(res["boundary"], float(np.abs(mz @ xinv - mm).max()))

        dp, dm = dplus(z), dminus(z)
        res["det_identity"] = max(
            res["det_identity"],
            abs(dp * np.linalg.det(xinv) - 1.0),
            abs(np.linalg.det(mm) / dm - 1.0),
        )

        q1 = fact.sd.q1_at(z)
        q2 = fact.sd.q2_at(z)
        delta_z = dm * dp
        res["symmetry_identity"] = max(
            res["symmetry_identity"],
            float(np.abs(mz @ q1 @ mz - delta_z * q2).max()),
        )

        fp = _colvec(fact.first.plus, z)
        fm = _colvec(fact.first.minus, z)
        sp = _colvec(fact.second.plus, z)
        sm = _colvec(fact.second.minus, z)
        res["propagation"] = max(
            res["propagation"],
            float(np.abs(mz @ (J @ q2 @ fp) - J @ q1 @ fm).max()),
        )

        r2z = fact.r2(z)
        res["r2_cross_plus"] = max(
            res["r2_cross_plus"], abs(r2z - dp * (sp @ q2 @ fp))
        )
        res["r2_cross_minus"] = max(
            res["r2_cross_minus"], abs(r2z - (sm @ q1 @ fm) / dm)
        )

    passed = all(
        v <= (10.0 * tol if k.startswith("r2_cross") else tol)
        for k, v in res.items()
    )
    return VerificationReport(residuals=res, tol=tol, passed=passed)
