"""Complex polynomials and rational functions with clustered root finding.

Polynomials are stored as ascending coefficient tuples (coeffs[k] multiplies
tau^k); the zero polynomial is the empty tuple.  Rational functions keep a
monic denominator and cancel common root clusters on construction.  All values
are immutable and every operation is a pure function, so everything here is
safe to use from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonConvergence, ResidualPole, ZeroDenominator

TRIM_REL = 1e-13        # leading-coefficient trim threshold, relative to max |coeff|
# An m-fold root of a polynomial whose coefficients carry relative noise eps
# splits into an m-star of radius ~(eps * condition)^(1/m): a few 1e-8 for
# doubles, a few 1e-5 for triples at double precision.  A 1e-8 clustering
# tolerance therefore misreads noisy multiple roots as simple ones.  The
# finder clusters at 1e-6 and then coalesces wider m-stars only when all
# derivatives up to order m-1 verifiably vanish at the polished centre.
CLUSTER_TOL = 1e-6      # root clustering tolerance, relative to max root magnitude
COALESCE_TOL = 1e-3     # candidate radius for validated multiple-root merging
CLUSTER_FLOOR = 1e-10   # absolute clustering floor
ABERTH_MAX_ITER = 200

_NEG_INF = float("-inf")


def _trim(coeffs) -> tuple[complex, ...]:
    cs = [complex(c) for c in coeffs]
    if not cs:
        return ()
    top = max(abs(c) for c in cs)
    if top == 0.0:
        return ()
    while cs and abs(cs[-1]) <= TRIM_REL * top:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class CPoly:
    """Complex polynomial, ascending coefficients, trimmed on construction."""

    coeffs: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    # -- basic queries -------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self):
        """Degree as int; -inf for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else _NEG_INF

    @property
    def lead(self) -> complex:
        if not self.coeffs:
            return 0.0 + 0.0j
        return self.coeffs[-1]

    # -- constructors --------------------------------------------------
    @staticmethod
    def zero() -> "CPoly":
        return CPoly(())

    @staticmethod
    def one() -> "CPoly":
        return CPoly((1.0,))

    @staticmethod
    def x() -> "CPoly":
        """The monomial tau."""
        return CPoly((0.0, 1.0))

    @staticmethod
    def from_roots(roots, lead: complex = 1.0) -> "CPoly":
        p = np.array([lead], dtype=complex)
        for r in roots:
            p = np.convolve(p, np.array([-r, 1.0], dtype=complex))
        return CPoly(tuple(p))

    @staticmethod
    def from_clusters(clusters, lead: complex = 1.0) -> "CPoly":
        roots = []
        for cl in clusters:
            roots.extend([cl.location] * cl.multiplicity)
        p = CPoly.from_roots(roots, lead)
        if roots:
            _prime_roots_cache(p, clusters)
        return p

    # -- evaluation ----------------------------------------------------
    def __call__(self, z):
        """Horner evaluation; supports scalars and numpy arrays."""
        if not self.coeffs:
            return np.zeros_like(z, dtype=complex) if isinstance(z, np.ndarray) else 0.0 + 0.0j
        if isinstance(z, np.ndarray):
            acc = np.full(z.shape, self.coeffs[-1], dtype=complex)
            for c in reversed(self.coeffs[:-1]):
                acc = acc * z + c
            return acc
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return complex(acc)

    def derivative(self) -> "CPoly":
        return CPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0.0] * (n - len(self.coeffs))
        for k, c in enumerate(other.coeffs):
            a[k] += c
        return CPoly(tuple(a))

    __radd__ = __add__

    def __neg__(self):
        return CPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return CPoly(tuple(c * other for c in self.coeffs))
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return CPoly.zero()
        prod = np.convolve(np.array(self.coeffs), np.array(other.coeffs))
        return CPoly(tuple(prod))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = CPoly.one()
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def monic(self) -> "CPoly":
        if self.is_zero:
            return self
        return self * (1.0 / self.lead)

    def shift_scale(self, scale: complex) -> "CPoly":
        return self * scale


def _as_poly(v) -> CPoly:
    if isinstance(v, CPoly):
        return v
    return CPoly((complex(v),))


def poly_divmod(a: CPoly, b: CPoly) -> tuple[CPoly, CPoly]:
    """Euclidean division a = b*q + r with deg r < deg b."""
    if b.is_zero:
        raise ZeroDenominator("polynomial division by zero")
    if a.is_zero or len(a.coeffs) < len(b.coeffs):
        return CPoly.zero(), a
    rem = list(a.coeffs)
    nb = len(b.coeffs)
    quot = [0.0 + 0.0j] * (len(rem) - nb + 1)
    blead = b.coeffs[-1]
    for k in range(len(quot) - 1, -1, -1):
        c = rem[k + nb - 1] / blead
        quot[k] = c
        if c != 0.0:
            for j, bc in enumerate(b.coeffs):
                rem[k + j] -= c * bc
    return CPoly(tuple(quot)), CPoly(tuple(rem[: nb - 1]))


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootCluster:
    """A polynomial root location with its (clustered) multiplicity."""

    location: complex
    multiplicity: int


def poly_eval(p: CPoly, z) -> complex:
    """Horner evaluation of p at z (spec surface for CPoly.__call__)."""
    return p(z)


def poly_derivative(p: CPoly) -> CPoly:
    return p.derivative()


def _aberth(coeffs: np.ndarray) -> np.ndarray:
    """All roots of a polynomial (ascending complex coeffs, degree >= 1)
    by Aberth-Ehrlich simultaneous iteration."""
    c = coeffs / coeffs[-1]
    n = len(c) - 1
    if n == 1:
        return np.array([-c[0]])
    if n == 2:
        # stable quadratic formula
        b, a0 = c[1], c[0]
        disc = np.lib.scimath.sqrt(b * b - 4.0 * a0)
        if abs(b - disc) > abs(b + disc):
            q = -0.5 * (b - disc)
        else:
            q = -0.5 * (b + disc)
        if q == 0.0:
            return np.array([0.0 + 0.0j, 0.0 + 0.0j])
        return np.array([q, a0 / q])

    radius = 1.0 + max(abs(c[:-1]))
    angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n + 0.43
    z = radius * np.exp(1j * angles)
    dcoef = c[1:] * np.arange(1, n + 1)
    eps = np.finfo(float).eps

    for _ in range(ABERTH_MAX_ITER):
        # Horner for p, p' and a running rounding bound on |p|
        p = np.full(n, c[-1], dtype=complex)
        bound = np.abs(p)
        for ck in c[-2::-1]:
            p = p * z + ck
            bound = bound * np.abs(z) + np.abs(p)
        dp = np.full(n, dcoef[-1], dtype=complex)
        for ck in dcoef[-2::-1]:
            dp = dp * z + ck
        done = np.abs(p) <= 8.0 * eps * bound
        if done.all():
            return z
        dp = np.where(dp == 0.0, eps, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0  # remove the diagonal 1/1 terms
        denom = 1.0 - w * s
        denom = np.where(denom == 0.0, eps, denom)
        corr = np.where(done, 0.0, w / denom)
        z = z - corr
        if np.abs(corr).max() <= 50.0 * eps * (1.0 + np.abs(z).max()):
            return z
    # iteration cap reached: accept if residuals are still at noise level
    p = np.full(n, c[-1], dtype=complex)
    bound = np.abs(p)
    for ck in c[-2::-1]:
        p = p * z + ck
        bound = bound * np.abs(z) + np.abs(p)
    if (np.abs(p) <= 1e5 * eps * bound).all():
        return z
    raise NonConvergence(
        f"Aberth iteration did not converge in {ABERTH_MAX_ITER} steps (degree {n})"
    )


def cluster_points(points, tol_rel: float = CLUSTER_TOL) -> list[RootCluster]:
    """Merge points within tolerance into clusters (transitive closure)."""
    pts = list(points)
    if not pts:
        return []
    scale = max(abs(p) for p in pts)
    tol = max(tol_rel * scale, CLUSTER_FLOOR)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(pts[i] - pts[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(pts[i])
    clusters = [
        RootCluster(complex(sum(g)) / len(g), len(g)) for g in groups.values()
    ]
    clusters.sort(key=lambda cl: (cl.location.real, cl.location.imag))
    return clusters


def _poly_val(coeffs, z: complex) -> complex:
    acc = 0.0 + 0.0j
    for ck in coeffs[::-1]:
        acc = acc * z + ck
    return acc


def _coalesce_multiples(coeffs: np.ndarray, clusters: list, tol: float) -> list:
    """Merge clusters forming a noisy multiple-root star.

    Candidate groups within COALESCE_TOL are accepted as one multiplicity-m
    root only when p, p', ..., p^(m-1) all vanish at noise level at the
    Newton-polished centre; genuinely distinct nearby roots fail that test.
    """
    if len(clusters) < 2:
        return clusters
    scale = max(max(abs(cl.location) for cl in clusters), 1.0)
    radius = COALESCE_TOL * scale
    n = len(clusters)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(clusters[i].location - clusters[j].location) <= radius:
                parent[find(j)] = find(i)
    groups: dict[int, list] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(clusters[i])

    out = []
    for group in groups.values():
        mult = sum(cl.multiplicity for cl in group)
        if len(group) < 2:
            out.extend(group)
            continue
        z0 = sum(cl.location * cl.multiplicity for cl in group) / mult
        z = _polish_multiple(coeffs, z0, mult, tol)
        d = np.array(coeffs, dtype=complex)
        ok = True
        for _ in range(mult):
            mag = max((abs(c) for c in d), default=0.0)
            bound = mag * max(1.0, abs(z)) ** max(len(d) - 1, 0)
            if bound > 0.0 and abs(_poly_val(d, z)) > 1e-6 * bound:
                ok = False
                break
            d = d[1:] * np.arange(1, len(d))
        if ok:
            out.append(RootCluster(z, mult))
        else:
            out.extend(group)
    out.sort(key=lambda cl: (cl.location.real, cl.location.imag))
    return out


def _polish_multiple(coeffs: np.ndarray, z: complex, mult: int, tol: float) -> complex:
    """Refine a multiplicity-m cluster location via Newton on the (m-1)th
    derivative, where the root is simple.  A split double root's centroid is
    only as accurate as the coefficient noise allows; the derivative root is
    the stable representative of the underlying multiple root."""
    d = coeffs
    for _ in range(mult - 1):
        d = d[1:] * np.arange(1, len(d))
    dd = d[1:] * np.arange(1, len(d))
    z0 = z
    for _ in range(3):
        val = 0.0 + 0.0j
        for ck in d[::-1]:
            val = val * z + ck
        dval = 0.0 + 0.0j
        for ck in dd[::-1]:
            dval = dval * z + ck
        if dval == 0.0:
            break
        step = val / dval
        z = z - step
    if abs(z - z0) > 2.0 * COALESCE_TOL * max(1.0, abs(z0)):
        return z0  # polish wandered off; keep the centroid
    return z


_ROOTS_CACHE: dict = {}
_ROOTS_CACHE_MAX = 65536


def _prime_roots_cache(p: CPoly, clusters) -> None:
    """Record known root clusters for a polynomial built from them, so later
    poly_roots calls skip the iterative finder (and keep the exact intent)."""
    if len(_ROOTS_CACHE) > _ROOTS_CACHE_MAX:
        _ROOTS_CACHE.clear()
    ordered = tuple(sorted(clusters,
                           key=lambda cl: (cl.location.real, cl.location.imag)))
    _ROOTS_CACHE[(p.coeffs, CLUSTER_TOL)] = ordered


def _roots_cached(coeffs: tuple, tol: float) -> tuple:
    key = (coeffs, tol)
    hit = _ROOTS_CACHE.get(key)
    if hit is not None:
        return hit
    arr = np.array(coeffs, dtype=complex)
    # exact zero roots come from exact zero trailing coefficients
    k = 0
    while k < len(arr) - 1 and arr[k] == 0.0:
        k += 1
    raw = [0.0 + 0.0j] * k
    if len(arr) - k >= 2:
        raw.extend(_aberth(arr[k:]))
    clusters = cluster_points(raw, tol)
    out = []
    for cl in clusters:
        if cl.multiplicity >= 2 and cl.location != 0.0:
            loc = _polish_multiple(arr, cl.location, cl.multiplicity, tol)
            out.append(RootCluster(loc, cl.multiplicity))
        else:
            out.append(cl)
    result = tuple(out)
    if len(_ROOTS_CACHE) > _ROOTS_CACHE_MAX:
        _ROOTS_CACHE.clear()
    _ROOTS_CACHE[key] = result
    return result


def poly_roots(p: CPoly, cluster_tol: float = CLUSTER_TOL) -> list[RootCluster]:
    """All complex roots with clustered multiplicities (sum = degree)."""
    if p.is_zero or p.degree < 1:
        raise ValueError("poly_roots requires degree >= 1")
    return list(_roots_cached(p.coeffs, cluster_tol))


def _match_clusters(a: RootCluster, b: RootCluster, scale: float,
                    tol_rel: float = CLUSTER_TOL) -> bool:
    tol = max(tol_rel * scale, CLUSTER_FLOOR)
    return abs(a.location - b.location) <= tol


def _deflate(p: CPoly, root: complex, mult: int) -> CPoly:
    """Synthetic deflation of p by (tau - root)^mult, remainder discarded."""
    cs = list(p.coeffs)
    for _ in range(mult):
        out = []
        acc = cs[-1]
        for k in range(len(cs) - 2, -1, -1):
            out.append(acc)
            acc = cs[k] + acc * root
        cs = list(reversed(out))
    return CPoly(tuple(cs))


def _deflate_once_stable(cs: list, root: complex) -> tuple[list, float]:
    """One synthetic deflation of (tau - root), run on the reversed
    coefficients when |root| > 1 so noise is damped instead of amplified.
    Returns (quotient coeffs, |remainder|)."""
    if abs(root) <= 1.0:
        out = []
        acc = cs[-1]
        for k in range(len(cs) - 2, -1, -1):
            out.append(acc)
            acc = cs[k] + acc * root
        return list(reversed(out)), abs(acc)
    # p = q*(tau - root)  <=>  rev(p) = rev(q) * (-root) * (x - 1/root)
    inv = 1.0 / root
    rev = cs[::-1]
    out = []
    acc = rev[-1]
    for k in range(len(rev) - 2, -1, -1):
        out.append(acc)
        acc = rev[k] + acc * inv
    revq = list(reversed(out))
    q = [c / (-root) for c in revq[::-1]]
    return q, abs(acc)


def poly_deflate_clusters(p: CPoly, clusters, scale: float = 0.0,
                          what: str = "deflation") -> CPoly:
    """Quotient of p by prod (tau - z)^m over the clusters, assuming exact
    divisibility up to round-off.  Deflations at exterior roots run on the
    reversed polynomial; the discarded remainders must stay at noise level
    relative to max(scale, |p|), else ResidualPole is raised."""
    pmag = max((abs(c) for c in p.coeffs), default=0.0)
    if pmag == 0.0:
        return CPoly.zero()
    mag = max(scale, pmag)
    total = sum(cl.multiplicity for cl in clusters)
    if len(p.coeffs) - 1 < total:
        if scale > 0.0 and pmag <= 1e-7 * scale:
            return CPoly.zero()  # the dividend is pure noise
        raise ResidualPole(
            f"{what}: degree {len(p.coeffs) - 1} too small to remove {total} roots"
        )
    cs = list(p.coeffs)
    for cl in clusters:
        for _ in range(cl.multiplicity):
            if len(cs) < 2:
                raise ResidualPole(f"{what}: polynomial degree exhausted")
            cs, rem = _deflate_once_stable(cs, cl.location)
            if mag > 0.0 and rem > 1e-7 * mag:
                raise ResidualPole(
                    f"{what} failed: remainder {rem:.3e} vs scale {mag:.3e}"
                )
    return CPoly(tuple(cs))


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CRational:
    """Quotient of two CPoly with monic denominator and no shared root
    cluster.  Construct through rat_normalize (or the arithmetic helpers)."""

    num: CPoly
    den: CPoly

    # -- queries ---------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def bounded_at_infinity(self) -> bool:
        return self.num.is_zero or self.num.degree <= self.den.degree

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def eval_derivative(self, z) -> complex:
        dn = self.num.derivative()(z)
        dd = self.den.derivative()(z)
        d = self.den(z)
        return (dn * d - self.num(z) * dd) / (d * d)

    def eval_infinity(self):
        """Limit at infinity: 0, finite leading ratio, or math.inf marker."""
        if self.num.is_zero:
            return 0.0 + 0.0j
        dn, dd = self.num.degree, self.den.degree
        if dn < dd:
            return 0.0 + 0.0j
        if dn == dd:
            return self.num.lead / self.den.lead
        return math.inf

    def zeros(self) -> list[RootCluster]:
        if self.num.is_zero or self.num.degree < 1:
            return []
        return poly_roots(self.num)

    def poles(self) -> list[RootCluster]:
        if self.den.degree < 1:
            return []
        return poly_roots(self.den)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        return rat_arith(self, _as_rational(other), "add")

    __radd__ = __add__

    def __sub__(self, other):
        return rat_arith(self, _as_rational(other), "sub")

    def __rsub__(self, other):
        return rat_arith(_as_rational(other), self, "sub")

    def __mul__(self, other):
        return rat_arith(self, _as_rational(other), "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return rat_arith(self, _as_rational(other), "div")

    def __rtruediv__(self, other):
        return rat_arith(_as_rational(other), self, "div")

    def __neg__(self):
        return CRational(-self.num, self.den)

    # -- constructors --------------------------------------------------------
    @staticmethod
    def const(c) -> "CRational":
        return CRational(CPoly((complex(c),)), CPoly.one())

    @staticmethod
    def one() -> "CRational":
        return CRational.const(1.0)

    @staticmethod
    def zero_fn() -> "CRational":
        return CRational(CPoly.zero(), CPoly.one())

    @staticmethod
    def from_poly(p: CPoly) -> "CRational":
        return CRational(p, CPoly.one())


def _as_rational(v) -> CRational:
    if isinstance(v, CRational):
        return v
    if isinstance(v, CPoly):
        return CRational.from_poly(v)
    return CRational.const(v)


def rat_normalize(num: CPoly | tuple, den: CPoly | tuple) -> CRational:
    """Cancel common root clusters by synthetic deflation, make den monic."""
    if not isinstance(num, CPoly):
        num = CPoly(tuple(num))
    if not isinstance(den, CPoly):
        den = CPoly(tuple(den))
    if den.is_zero:
        raise ZeroDenominator("denominator is identically zero")
    if num.is_zero:
        return CRational(CPoly.zero(), CPoly.one())

    if num.degree >= 1 and den.degree >= 1:
        droots = poly_roots(den)
        # quick reject: no numerator zero anywhere near a denominator root
        # (cluster matching only cancels pairs within ~1e-5, which would
        # leave |num| <= 1e-4 of its characteristic size at the root)
        if all(abs(num(cl.location)) > 1e-4 * _char_scale(num, cl.location)
               for cl in droots):
            lead = den.lead
            return CRational(num * (1.0 / lead), den * (1.0 / lead))
        nroots = poly_roots(num)
        scale = max(
            [abs(c.location) for c in nroots] + [abs(c.location) for c in droots]
        )
        used = [0] * len(nroots)
        cancel = []  # (num cluster index, den cluster, multiplicity)
        for dcl in droots:
            best, best_d = -1, math.inf
            for i, ncl in enumerate(nroots):
                if used[i] >= ncl.multiplicity:
                    continue
                d = abs(ncl.location - dcl.location)
                if d < best_d:
                    best, best_d = i, d
            if best >= 0 and _match_clusters(nroots[best], dcl, scale):
                m = min(nroots[best].multiplicity - used[best], dcl.multiplicity)
                used[best] += m
                cancel.append((best, dcl, m))
        for i, dcl, m in cancel:
            # deflate each polynomial at its own root estimate
            num = _deflate(num, nroots[i].location, m)
            den = _deflate(den, dcl.location, m)

    if den.is_zero:
        raise ZeroDenominator("denominator vanished during normalisation")
    lead = den.lead
    return CRational(num * (1.0 / lead), den * (1.0 / lead))


def _den_lcm(a: CPoly, b: CPoly) -> tuple[CPoly, CPoly, CPoly]:
    """LCM of two monic denominators via root clusters.

    Returns (lcm, cof_a, cof_b) with lcm = a*cof_a = b*cof_b up to round-off.
    """
    if a.coeffs == b.coeffs:
        return a, CPoly.one(), CPoly.one()
    if a.degree < 1:
        return b, b, CPoly.one()
    if b.degree < 1:
        return a, CPoly.one(), a
    acl = poly_roots(a)
    bcl = poly_roots(b)
    scale = max([abs(c.location) for c in acl] + [abs(c.location) for c in bcl])
    extra_b = []   # clusters of b missing from a (with deficit multiplicity)
    taken = [0] * len(acl)
    for bc in bcl:
        hit = None
        for i, ac in enumerate(acl):
            if _match_clusters(ac, bc, scale):
                hit = i
                break
        if hit is None:
            extra_b.append(bc)
        else:
            taken[hit] = max(taken[hit], bc.multiplicity)
            if bc.multiplicity > acl[hit].multiplicity:
                extra_b.append(
                    RootCluster(bc.location, bc.multiplicity - acl[hit].multiplicity)
                )
    cof_a = CPoly.from_clusters(extra_b)
    lcm = a * cof_a
    if extra_b:
        merged = {}
        for cl in list(acl) + extra_b:
            key = (cl.location.real, cl.location.imag)
            merged[key] = merged.get(key, 0) + cl.multiplicity
        _prime_roots_cache(
            lcm, [RootCluster(complex(x, y), m) for (x, y), m in merged.items()]
        )
    # cof_b = lcm / b, built from the cluster multiset difference
    diff = []
    for i, ac in enumerate(acl):
        m = ac.multiplicity - taken[i]
        if m > 0:
            diff.append(RootCluster(ac.location, m))
    cof_b = CPoly.from_clusters(diff)
    return lcm, cof_a, cof_b


def rat_arith(a: CRational, b: CRational, op: str) -> CRational:
    """Exact arithmetic on rational functions followed by normalisation."""
    if op in ("add", "sub"):
        sign = 1.0 if op == "add" else -1.0
        lcm, cof_a, cof_b = _den_lcm(a.den, b.den)
        num = a.num * cof_a + sign * (b.num * cof_b)
        return rat_normalize(num, lcm)
    if op == "mul":
        return rat_normalize(a.num * b.num, a.den * b.den)
    if op == "div":
        if b.is_zero:
            raise ZeroDenominator("division by the zero function")
        if a.den.coeffs == b.den.coeffs:
            return rat_normalize(a.num, b.num)  # common denominator drops out
        return rat_normalize(a.num * b.den, a.den * b.num)
    raise ValueError(f"unknown op {op!r}")


def rat_eval_infinity(r: CRational):
    return r.eval_infinity()


def over_common_denominator(f1: CRational, f2: CRational) -> tuple[CPoly, CPoly, CPoly]:
    """(U1, U2, W) with f1 = U1/W, f2 = U2/W and W the monic denominator LCM."""
    w, cof1, cof2 = _den_lcm(f1.den, f2.den)
    return f1.num * cof1, f2.num * cof2, w


def _char_scale(p: CPoly, z: complex) -> float:
    """Characteristic magnitude of p at z: coefficient norm times the size of
    the largest monomial.  A value of p far below this counts as a zero."""
    mag = max((abs(c) for c in p.coeffs), default=0.0)
    return mag * max(1.0, abs(z)) ** max(len(p.coeffs) - 1, 0)


def rat_reduced(num: CPoly, den: CPoly | None = None, den_scale: complex = 1.0,
                den_clusters=None) -> CRational:
    """num / (den_scale * prod of den clusters) with evaluation-based
    cancellation.

    Denominator root clusters at which num verifiably vanishes are deflated
    from num at the *denominator's* root location, which is typically known
    to much higher accuracy than a refound numerator root.  Used by the
    factor-column construction, where divisibility was imposed exactly.
    The clusters may be passed directly (den is then not rooted at all).
    """
    if den_clusters is None:
        if den is None:
            raise ZeroDenominator("need a denominator or its clusters")
        if den.is_zero:
            raise ZeroDenominator("denominator is identically zero")
        den_clusters = poly_roots(den) if den.degree >= 1 else []
    if num.is_zero:
        return CRational(CPoly.zero(), CPoly.one())
    survivors = []
    for cl in den_clusters:
        z, m = cl.location, cl.multiplicity
        while m > 0:
            bound = _char_scale(num, z)
            if bound == 0.0 or abs(num(z)) > 1e-8 * bound:
                break
            num = _deflate(num, z, 1)
            m -= 1
        if m > 0:
            survivors.append(RootCluster(z, m))
    new_den = CPoly.from_clusters(survivors)
    return CRational(num * (1.0 / den_scale), new_den)


def compose_poly_rational(p: CPoly, r: CRational) -> CRational:
    """p(r(tau)) as a rational function of tau."""
    if p.is_zero:
        return CRational.zero_fn()
    n = p.degree
    den_pows = [CPoly.one()]
    for _ in range(n):
        den_pows.append(den_pows[-1] * r.den)
    num = CPoly.zero()
    for k, c in enumerate(p.coeffs):
        num = num + c * (r.num ** k) * den_pows[n - k]
    return rat_normalize(num, den_pows[n])
