import math

import numpy as np
import pytest

from whfact import (
    CPoly,
    CRational,
    NonConvergence,
    ZeroDenominator,
    poly_derivative,
    poly_eval,
    poly_roots,
    rat_arith,
    rat_eval_infinity,
    rat_normalize,
)
from whfact.ratfun import poly_divmod, rat_reduced


def crat(num, den=(1.0,)):
    return rat_normalize(CPoly(tuple(num)), CPoly(tuple(den)))


def sample_equal(f, g, pts, rtol=1e-10):
    fv = np.array([f(z) for z in pts])
    gv = np.array([g(z) for z in pts])
    scale = max(np.abs(gv).max(), 1.0)
    return np.abs(fv - gv).max() <= rtol * scale


class TestPolyEval:
    def test_quadratic(self):
        assert poly_eval(CPoly((-1, 0, 1)), 2.0) == pytest.approx(3.0)

    def test_zero_poly(self):
        assert poly_eval(CPoly(()), 5.0 + 1.0j) == 0.0

    def test_quartic_from_double_zeros(self):
        # tau^2 (tau - 2)^2 / 4 evaluated at 1
        p = CPoly((0.0, 0.0, 1.0, -1.0, 0.25))
        assert poly_eval(p, 1.0) == pytest.approx(0.25)

    def test_vectorized(self):
        p = CPoly((1.0, 2.0, 3.0))
        zs = np.array([0.0, 1.0, 1j])
        np.testing.assert_allclose(p(zs), [1.0, 6.0, 1 + 2j + 3 * 1j * 1j])


class TestPolyDerivative:
    def test_quartic(self):
        p = CPoly((0.0, 0.0, 0.0, -1.0, 0.25))  # tau^4/4 - tau^3
        assert poly_derivative(p).coeffs == (0.0, 0.0, -3.0, 1.0)

    def test_constant(self):
        assert poly_derivative(CPoly((7.0,))).is_zero

    def test_linear(self):
        assert poly_derivative(CPoly((0.0, 1.0))).coeffs == (1.0,)


class TestPolyRoots:
    def test_simple_pair(self):
        roots = poly_roots(CPoly((-1.0, 0.0, 1.0)))
        locs = sorted(r.location.real for r in roots)
        assert locs == pytest.approx([-1.0, 1.0])
        assert all(r.multiplicity == 1 for r in roots)

    def test_two_double_zeros(self):
        roots = poly_roots(CPoly((0.0, 0.0, 4.0, -4.0, 1.0)))  # tau^2 (tau-2)^2
        assert [(round(r.location.real, 6), r.multiplicity) for r in roots] == [
            (0.0, 2), (2.0, 2)]

    def test_triple_root(self):
        p = CPoly.from_roots([1 + 1j] * 3)
        (cl,) = poly_roots(p)
        assert cl.multiplicity == 3
        assert cl.location == pytest.approx(1 + 1j, abs=1e-8)

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            poly_roots(CPoly((3.0,)))

    def test_residual_invariant(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            roots = rng.uniform(-2, 2, 5) + 1j * rng.uniform(-2, 2, 5)
            p = CPoly.from_roots(roots, lead=rng.uniform(0.5, 2.0))
            scale = max(abs(c) for c in p.coeffs)
            for cl in poly_roots(p):
                assert abs(p(cl.location)) <= 1e-9 * scale
                if cl.multiplicity >= 2:
                    assert abs(p.derivative()(cl.location)) <= 1e-9 * scale

    def test_product_union_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n1, n2 = rng.integers(1, 5), rng.integers(1, 4)
            # keep the random roots well separated relative to the tolerance
            r1 = rng.integers(-4, 5, n1) + 0.5j * rng.integers(-4, 5, n1)
            r2 = rng.integers(-4, 5, n2) + 0.5j * rng.integers(-4, 5, n2) + 0.25
            p, q = CPoly.from_roots(r1), CPoly.from_roots(r2)
            combined = sorted(
                [cl.location for cl in poly_roots(p * q)
                 for _ in range(cl.multiplicity)],
                key=lambda z: (z.real, z.imag),
            )
            expected = sorted(list(r1) + list(r2), key=lambda z: (z.real, z.imag))
            assert len(combined) == len(expected)
            for a, b in zip(combined, expected):
                assert abs(a - b) <= 1e-6 * 6


class TestRatNormalize:
    def test_cancel_simple(self):
        q = rat_normalize(CPoly((-1.0, 0.0, 1.0)), CPoly((-1.0, 1.0)))
        assert q.den.degree == 0
        assert q(3.0) == pytest.approx(4.0)
        assert q(0.0) == pytest.approx(1.0)

    def test_scalar_cancel(self):
        q = rat_normalize(CPoly((0.0, 2.0)), CPoly((2.0,)))
        assert q.num.coeffs == (0.0, 1.0)
        assert q.den.coeffs == (1.0,)

    def test_partial_cancel_against_double_pole(self):
        # tau (tau-4)(tau-2) * (-1/2) over (tau-2)^2 -> -tau(tau-4)/(2(tau-2))
        num = CPoly.from_roots([0.0, 4.0, 2.0], lead=-0.5)
        den = CPoly.from_roots([2.0, 2.0])
        q = rat_normalize(num, den)
        rng = np.random.default_rng(3)
        pts = rng.uniform(-3, 3, 10) + 1j * rng.uniform(0.5, 2, 10)
        assert sample_equal(q, lambda z: -z * (z - 4) / (2 * (z - 2)), pts)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDenominator):
            rat_normalize(CPoly((1.0,)), CPoly(()))

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            num = CPoly(tuple(rng.standard_normal(4) + 1j * rng.standard_normal(4)))
            den = CPoly(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
            q = rat_normalize(num, den)
            q2 = rat_normalize(q.num, q.den)
            assert q2.num.coeffs == q.num.coeffs
            assert q2.den.coeffs == q.den.coeffs


class TestRatArith:
    def test_add_reciprocal(self):
        tau = crat((0.0, 1.0))
        inv = CRational.one() / tau
        out = inv + tau
        assert out.num.coeffs == pytest.approx((1.0, 0.0, 1.0))
        assert out.den.coeffs == pytest.approx((0.0, 1.0))

    def test_blaschke_product_recovers_spectral_curve(self):
        # Section 3.2 family at (rho, v) = (4, 3): m- * m+ = omega
        mminus = crat((2.0, 4.0), (0.0, 1.0))      # (4 tau + 2)/tau
        mplus = crat((1.0, -0.5))                  # 1 - tau/2
        w = rat_arith(mminus, mplus, "mul")
        pts = np.exp(2j * np.pi * np.arange(16) / 16)
        assert sample_equal(w, lambda z: 3 + 2 * (1 - z * z) / z, pts, 1e-12)

    def test_mul_by_inverse_is_one(self):
        q = crat((1.0, 2.0, 1.5), (0.5, 0.0, 1.0))
        qinv = CRational.one() / q
        prod = q * qinv
        assert prod.num.degree == 0 and prod.den.degree == 0
        assert prod(0.7) == pytest.approx(1.0)

    def test_div_by_zero_function(self):
        with pytest.raises(ZeroDenominator):
            rat_arith(CRational.one(), CRational.zero_fn(), "div")

    def test_round_trip_invariant(self):
        rng = np.random.default_rng(13)
        pts = np.exp(2j * np.pi * (np.arange(16) + 0.3) / 16) * 1.3
        for _ in range(10):
            a = crat(rng.standard_normal(3), (rng.uniform(2, 3), 0.0, 1.0))
            b = crat(rng.standard_normal(2), (rng.uniform(-3, -2), 1.0))
            back = (a + b) - b
            av = np.array([a(z) for z in pts])
            bv = np.array([back(z) for z in pts])
            assert np.abs(av - bv).max() <= 1e-10 * max(1.0, np.abs(av).max())


class TestEvalInfinity:
    def test_equal_degrees(self):
        assert rat_eval_infinity(crat((0.0, 1.0), (2.0, 4.0))) == pytest.approx(0.25)

    def test_proper(self):
        assert rat_eval_infinity(crat((1.0,), (0.0, 1.0))) == 0.0

    def test_unbounded_marker(self):
        r = rat_normalize(CPoly((0.0, 0.0, 1.0)), CPoly((0.0, 1.0)))
        assert math.isinf(rat_eval_infinity(r))


class TestDivisionHelpers:
    def test_poly_divmod(self):
        a = CPoly.from_roots([1.0, 2.0, 3.0])
        q, r = poly_divmod(a, CPoly.from_roots([2.0]))
        assert r.is_zero or max(abs(c) for c in r.coeffs) < 1e-12
        assert q(5.0) == pytest.approx((5 - 1) * (5 - 3))

    def test_rat_reduced_exterior_root(self):
        num = CPoly.from_roots([3.0, -1.0], lead=2.0)
        den = CPoly.from_roots([3.0])
        out = rat_reduced(num, den)
        assert out.den.degree == 0
        assert out(1.0) == pytest.approx(4.0)
