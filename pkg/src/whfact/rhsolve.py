"""First columns of the canonical factors via a finite linear system.

For a 2x2 rational matrix M with det M = 1, the boundary relation
M*phi+ = phi- is reduced to unknown polynomial numerators N1, N2 of the minus
column over the interior-pole polynomial pi+.  Writing the entries over their
least common denominator b, the plus components become

    phi1+ = (a22*N1 - a12*N2) / (b*pi+),   phi2+ = (a11*N2 - a21*N1) / (b*pi+),

and analyticity of phi1+ inside the contour is a set of linear conditions
(polynomial remainder of the numerator modulo the interior part of b*pi+).
Analyticity of phi2+ is then automatic provided the second-column polynomials
a12, a22 have no common interior zero; when one of them is identically zero
(diagonal/anti-diagonal matrices) the solver imposes phi2+'s cancellation rows
as well instead of relying on the reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import Contour, PointClass, DEFAULT_BAND
from .errors import (
    NonCanonical,
    NotSymmetric,
    PrecondViolation,
    ResidualPole,
    ZeroOnContour,
)
from .ratfun import (
    CPoly,
    CRational,
    RootCluster,
    CLUSTER_FLOOR,
    CLUSTER_TOL,
    poly_deflate_clusters,
    poly_divmod,
    poly_roots,
    rat_normalize,
    rat_reduced,
)

RANK_TOL = 1e-9       # relative to the largest singular value
RESIDUAL_TOL = 1e-8   # on unit-scaled rows
DET_ONE_TOL = 1e-8    # sampled |det M - 1| bound (v1 restriction)
SYM_TOL = 1e-12       # sampled symmetry check


@dataclass(frozen=True)
class RationalMatrix2:
    """2x2 matrix of rational functions; optionally flagged symmetric."""

    entries: tuple[tuple[CRational, CRational], tuple[CRational, CRational]]
    symmetric: bool = False

    def __post_init__(self):
        if self.symmetric:
            pts = np.exp(2j * np.pi * (np.arange(16) + 0.37) / 16)
            a12 = self.entries[0][1](pts)
            a21 = self.entries[1][0](pts)
            scale = max(np.abs(a12).max(), np.abs(a21).max(), 1e-30)
            if np.abs(a12 - a21).max() > SYM_TOL * scale:
                raise NotSymmetric("entry(1,2) != entry(2,1) on the contour")

    def entry(self, i: int, j: int) -> CRational:
        return self.entries[i][j]

    def at(self, z) -> np.ndarray:
        return np.array(
            [[self.entries[0][0](z), self.entries[0][1](z)],
             [self.entries[1][0](z), self.entries[1][1](z)]],
            dtype=complex,
        )

    def det_at(self, z) -> complex:
        return (self.entries[0][0](z) * self.entries[1][1](z)
                - self.entries[0][1](z) * self.entries[1][0](z))


@dataclass(frozen=True)
class ColumnPair:
    """Matched plus/minus column solving M*plus = minus on the contour."""

    plus: tuple[CRational, CRational]
    minus: tuple[CRational, CRational]


def _check_unimodular(m: RationalMatrix2) -> None:
    pts = np.exp(2j * np.pi * (np.arange(32) + 0.19) / 32)
    det = np.array([m.det_at(z) for z in pts])
    if np.abs(det - 1.0).max() > DET_ONE_TOL:
        raise PrecondViolation(
            "det M != 1 on the contour (v1 requires a unimodular matrix); "
            f"max deviation {np.abs(det - 1.0).max():.3e}"
        )


def _merged_denominator_clusters(m: RationalMatrix2, c: Contour, band: float):
    """All entry pole clusters merged with max multiplicity, classified."""
    merged: list[tuple[RootCluster, PointClass]] = []
    all_locs: list[complex] = []
    for row in m.entries:
        for e in row:
            for cl in e.poles():
                all_locs.append(cl.location)
    scale = max([abs(z) for z in all_locs], default=1.0)
    tol = max(CLUSTER_TOL * scale, CLUSTER_FLOOR)
    for row in m.entries:
        for e in row:
            for cl in e.poles():
                for i, (known, _) in enumerate(merged):
                    if abs(known.location - cl.location) <= tol:
                        if cl.multiplicity > known.multiplicity:
                            merged[i] = (
                                RootCluster(known.location, cl.multiplicity),
                                merged[i][1],
                            )
                        break
                else:
                    side = c.classify(cl.location, band)
                    if side is PointClass.ON_CONTOUR:
                        raise ZeroOnContour(
                            f"entry pole at {cl.location:.12g} lies on the contour band"
                        )
                    merged.append((cl, side))
    merged.sort(key=lambda t: (t[0].location.real, t[0].location.imag))
    return merged


def dplus_pole_polynomial(m: RationalMatrix2, c: Contour,
                          band: float = DEFAULT_BAND) -> CPoly:
    """Monic polynomial carrying the interior entry-pole clusters."""
    merged = _merged_denominator_clusters(m, c, band)
    interior = [cl for cl, side in merged if side is PointClass.INTERIOR]
    return CPoly.from_clusters(interior)


def _poly_times_rat(p: CPoly, r: CRational) -> CPoly:
    """p * r when the product is a polynomial (p kills r's denominator)."""
    prod = rat_normalize(p * r.num, r.den)
    if prod.den.degree != 0:
        raise ResidualPole(
            "expected polynomial product; denominator of degree "
            f"{prod.den.degree} survived"
        )
    return prod.num * (1.0 / prod.den.coeffs[0])


def _monomial_times(a: CPoly, k: int) -> CPoly:
    if a.is_zero:
        return a
    return CPoly((0.0,) * k + tuple(a.coeffs))


class _LinearRows:
    """Accumulates scaled rows of a complex linear system."""

    def __init__(self, nunk: int):
        self.nunk = nunk
        self.rows: list[np.ndarray] = []
        self.rhs: list[complex] = []

    def add(self, row: np.ndarray, rhs: complex) -> None:
        scale = max(np.abs(row).max(initial=0.0), abs(rhs))
        if scale == 0.0:
            return
        self.rows.append(row / scale)
        self.rhs.append(rhs / scale)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.rows:
            return np.zeros((0, self.nunk), dtype=complex), np.zeros(0, dtype=complex)
        return np.array(self.rows), np.array(self.rhs)


def _remainder_rows(sys_rows: _LinearRows, basis: list[CPoly], g: CPoly) -> None:
    """Rows forcing sum_k x_k * basis[k] to be divisible by g."""
    ng = len(g.coeffs) - 1
    if ng <= 0:
        return
    cols = []
    for p in basis:
        _, rem = poly_divmod(p, g)
        col = np.zeros(ng, dtype=complex)
        col[: len(rem.coeffs)] = rem.coeffs
        cols.append(col)
    mat = np.array(cols).T  # one row per remainder coefficient
    for r in range(ng):
        sys_rows.add(mat[r], 0.0)


def _quotient_at_zero(p: CPoly, g: CPoly) -> complex:
    q, _ = poly_divmod(p, g)
    return q(0.0)


@dataclass
class _Assembly:
    rows: _LinearRows
    pi_plus: CPoly
    pi_clusters: list
    g: CPoly
    g_clusters: list
    h: CPoly
    h_clusters: list
    basis_l1: list
    basis_l2: list
    ncoef: int


def _assemble(m: RationalMatrix2, c: Contour, band: float, proper: bool):
    """Shared assembly for solve_columns / kernel_dimension.

    The unknowns are the coefficients of N1, N2 (degree <= deg pi+ for the
    normalised solve, <= deg pi+ - 1 for the homogeneous kernel).  Returns
    None when the homogeneous ansatz space is empty.
    """
    merged = _merged_denominator_clusters(m, c, band)
    interior = [cl for cl, side in merged if side is PointClass.INTERIOR]
    exterior = [cl for cl, side in merged if side is PointClass.EXTERIOR]
    pi_plus = CPoly.from_clusters(interior)
    bcl = interior + exterior
    g_clusters = [RootCluster(cl.location, 2 * cl.multiplicity) for cl in interior]
    g = CPoly.from_clusters(g_clusters)
    h = CPoly.from_clusters(exterior)

    # a_ij = b * entry_ij is entry_ij.num times the clusters of b that the
    # entry's own denominator does not carry (b is the denominator LCM)
    def polynomialize(e: CRational) -> CPoly:
        if e.num.is_zero:
            return CPoly.zero()
        dencl = e.poles()
        rest = []
        for cl in bcl:
            m = cl.multiplicity
            for dcl in dencl:
                if abs(dcl.location - cl.location) <= max(
                        CLUSTER_TOL * max(1.0, abs(cl.location)), CLUSTER_FLOOR):
                    m -= dcl.multiplicity
            if m > 0:
                rest.append(RootCluster(cl.location, m))
        return e.num * CPoly.from_clusters(rest)

    a = [[polynomialize(m.entry(i, j)) for j in range(2)] for i in range(2)]

    dpi = len(pi_plus.coeffs) - 1
    ncoef = dpi if proper else dpi + 1  # coefficients per numerator
    if ncoef <= 0:
        return None

    basis_l1 = (
        [_monomial_times(a[1][1], k) for k in range(ncoef)]
        + [-_monomial_times(a[0][1], k) for k in range(ncoef)]
    )
    basis_l2 = (
        [-_monomial_times(a[1][0], k) for k in range(ncoef)]
        + [_monomial_times(a[0][0], k) for k in range(ncoef)]
    )

    rows = _LinearRows(2 * ncoef)
    _remainder_rows(rows, basis_l1, g)

    # reduction proposition: usable iff a12, a22 share no interior zero
    a12, a22 = a[0][1], a[1][1]
    if a12.is_zero or a22.is_zero:
        _remainder_rows(rows, basis_l2, g)
    else:
        z12 = poly_roots(a12) if a12.degree >= 1 else []
        z22 = poly_roots(a22) if a22.degree >= 1 else []
        locs = [cl.location for cl in z12 + z22]
        scale = max([abs(z) for z in locs], default=1.0)
        tol = max(CLUSTER_TOL * scale, CLUSTER_FLOOR)
        for c1 in z12:
            for c2 in z22:
                if (abs(c1.location - c2.location) <= tol
                        and c.classify(c1.location, band) is PointClass.INTERIOR):
                    raise PrecondViolation(
                        "second-column polynomials share an interior zero at "
                        f"{c1.location:.12g}; analyticity reduction unavailable"
                    )

    return _Assembly(rows, pi_plus, interior, g, g_clusters, h, exterior,
                     basis_l1, basis_l2, ncoef)


def solve_columns(m: RationalMatrix2, c: Contour, norm,
                  band: float = DEFAULT_BAND) -> ColumnPair:
    """Unique column pair with M*plus = minus on Gamma and plus(0) = norm."""
    _check_unimodular(m)
    asm = _assemble(m, c, band, proper=False)

    n1n, n2n = complex(norm[0]), complex(norm[1])
    h0 = asm.h(0.0)
    row1 = np.array([_quotient_at_zero(p, asm.g) for p in asm.basis_l1])
    asm.rows.add(row1, n1n * h0)
    row2 = np.array([_quotient_at_zero(p, asm.g) for p in asm.basis_l2])
    asm.rows.add(row2, n2n * h0)

    amat, rhs = asm.rows.matrix()
    x, _ = _lstsq_checked(amat, rhs, 2 * asm.ncoef)

    n1 = CPoly(tuple(x[: asm.ncoef]))
    n2 = CPoly(tuple(x[asm.ncoef:]))
    l1 = _combine(asm.basis_l1, x)
    l2 = _combine(asm.basis_l2, x)
    term_scale = float(np.abs(x).max(initial=0.0)) * max(
        [_poly_mag(p) for p in asm.basis_l1 + asm.basis_l2], default=0.0
    )
    q1 = poly_deflate_clusters(l1, asm.g_clusters, term_scale,
                               "phi1+ pole cancellation")
    q2 = poly_deflate_clusters(l2, asm.g_clusters, term_scale,
                               "phi2+ automatic analyticity")

    xmag = float(np.abs(x).max(initial=0.0))
    plus = (_reduced_snapped(q1, asm.h_clusters, term_scale),
            _reduced_snapped(q2, asm.h_clusters, term_scale))
    minus = (_reduced_snapped(n1, asm.pi_clusters, xmag),
             _reduced_snapped(n2, asm.pi_clusters, xmag))
    pair = ColumnPair(plus=plus, minus=minus)
    _assert_pair(pair, c, band, (n1n, n2n))
    return pair


def _reduced_snapped(num: CPoly, den_clusters, scale: float) -> CRational:
    """Reduce num over the cluster denominator; pure-noise numerators
    collapse to the zero function."""
    if scale > 0.0 and _poly_mag(num) <= 1e-12 * scale:
        return CRational(CPoly.zero(), CPoly.one())
    return rat_reduced(num, den_clusters=den_clusters)


def kernel_dimension(m: RationalMatrix2, c: Contour,
                     band: float = DEFAULT_BAND) -> int:
    """Dimension of the homogeneous solution space (phi- vanishing at oo)."""
    _check_unimodular(m)
    asm = _assemble(m, c, band, proper=True)
    if asm is None:
        return 0
    amat, _ = asm.rows.matrix()
    nunk = 2 * asm.ncoef
    if amat.shape[0] == 0:
        return nunk
    svals = np.linalg.svd(amat, compute_uv=False)
    rank = int((svals > RANK_TOL * svals[0]).sum()) if svals.size else 0
    return nunk - rank


def _combine(basis: list[CPoly], x: np.ndarray) -> CPoly:
    acc = CPoly.zero()
    for p, coef in zip(basis, x):
        acc = acc + p * coef
    return acc


def _poly_mag(p: CPoly) -> float:
    return max([abs(cc) for cc in p.coeffs], default=0.0)


def _exact_quotient(p: CPoly, g: CPoly, what: str, scale: float = 0.0) -> CPoly:
    """Quotient of an (in-principle exact) division; the remainder is noise
    and must be small relative to the magnitude of the terms that formed p."""
    q, rem = poly_divmod(p, g)
    scale = max(scale, _poly_mag(p))
    remmag = _poly_mag(rem)
    if scale > 0.0 and remmag > 1e-7 * scale:
        raise ResidualPole(
            f"{what} failed: remainder {remmag:.3e} vs scale {scale:.3e}"
        )
    return q


def solve_scaled_lstsq(amat: np.ndarray, rhs: np.ndarray, nunk: int,
                       exc: type[Exception], what: str) -> np.ndarray:
    """Rank-checked least squares with column equilibration and one step of
    iterative refinement; raises exc on rank deficiency or inconsistency."""
    if amat.shape[0] == 0:
        raise exc(f"empty {what} system for a nontrivial unknown vector")
    col = np.abs(amat).max(axis=0)
    col[col == 0.0] = 1.0
    a2 = amat / col
    x, _, rank, _ = np.linalg.lstsq(a2, rhs, rcond=RANK_TOL)
    if rank < nunk:
        raise exc(
            f"{what} system is rank deficient (rank {rank} < {nunk}); "
            "no unique canonical factorisation"
        )
    for _ in range(2):
        r = rhs - a2 @ x
        x = x + np.linalg.lstsq(a2, r, rcond=RANK_TOL)[0]
    resid = np.abs(a2 @ x - rhs).max(initial=0.0)
    if resid > RESIDUAL_TOL:
        raise exc(
            f"{what} system inconsistent (residual {resid:.3e}); "
            "no canonical factorisation"
        )
    return x / col


def _lstsq_checked(amat: np.ndarray, rhs: np.ndarray, nunk: int):
    x = solve_scaled_lstsq(amat, rhs, nunk, NonCanonical, "factor-column")
    return x, nunk


def _assert_pair(pair: ColumnPair, c: Contour, band: float, norm) -> None:
    v0 = np.array([pair.plus[0](0.0), pair.plus[1](0.0)])
    target = np.array(norm)
    if np.abs(v0 - target).max() > 1e-10 * max(1.0, np.abs(target).max()):
        raise ResidualPole(
            f"plus column normalisation failed: plus(0) = {v0}, wanted {target}"
        )
    for f in pair.plus:
        for cl in f.poles():
            if c.classify(cl.location, band) is not PointClass.EXTERIOR:
                raise ResidualPole(
                    f"plus component keeps a non-exterior pole at {cl.location:.12g}"
                )
    for f in pair.minus:
        if not f.bounded_at_infinity:
            raise ResidualPole("minus component unbounded at infinity")
        for cl in f.poles():
            if c.classify(cl.location, band) is not PointClass.INTERIOR:
                raise ResidualPole(
                    f"minus component keeps a non-interior pole at {cl.location:.12g}"
                )
