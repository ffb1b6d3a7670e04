import numpy as np
import pytest

from oracles import CsFamily, EpsFamily, galerkin_columns

from whfact import (
    CPoly,
    CRational,
    MonodromySpec,
    NonCanonical,
    NotSymmetric,
    PointClass,
    PrecondViolation,
    RationalMatrix2,
    dplus_pole_polynomial,
    kernel_dimension,
    make_contour,
    rat_normalize,
    solve_columns,
    spectral_substitute,
)

EPS = EpsFamily(1.0, 4.0, 3.0)
CS = CsFamily(2.0 ** 0.5, 1.0, 3.0, 5.0)


def eps_matrix():
    return spectral_substitute(MonodromySpec.aiii_eps(1.0), 4.0, 3.0)


def cs_matrix():
    return spectral_substitute(MonodromySpec.aiii_cs(2.0 ** 0.5, 1.0), 3.0, 5.0)


def identity_matrix():
    one, zero = CRational.one(), CRational.zero_fn()
    return RationalMatrix2(entries=((one, zero), (zero, one)), symmetric=True)


def tau_diag_matrix():
    """diag(tau, 1/tau): partial indices (1, -1), no canonical factorisation."""
    tau = rat_normalize(CPoly((0.0, 1.0)), CPoly((1.0,)))
    tauinv = CRational.one() / tau
    zero = CRational.zero_fn()
    return RationalMatrix2(entries=((tau, zero), (zero, tauinv)), symmetric=True)


def column_at(pair, side, pts):
    comps = pair.plus if side == "plus" else pair.minus
    return np.array([comps[0](pts), comps[1](pts)])


class TestRationalMatrix2:
    def test_symmetry_check(self):
        one, zero = CRational.one(), CRational.zero_fn()
        two = CRational.const(2.0)
        with pytest.raises(NotSymmetric):
            RationalMatrix2(entries=((one, one), (two, one)), symmetric=True)

    def test_unflagged_asymmetric_allowed(self):
        one, zero = CRational.one(), CRational.zero_fn()
        two = CRational.const(2.0)
        RationalMatrix2(entries=((one, one), (two, one)), symmetric=False)


class TestDplusPolePolynomial:
    def test_eps_family(self):
        pi = dplus_pole_polynomial(eps_matrix(), make_contour(1))
        # interior entry poles at 0 and tau0 = -1/2: pi+ = tau (tau + 1/2)
        assert pi.coeffs == pytest.approx((0.0, 0.5, 1.0), abs=1e-12)

    def test_identity(self):
        pi = dplus_pole_polynomial(identity_matrix(), make_contour(1))
        assert pi.coeffs == (1.0,)

    def test_cs_family(self):
        pi = dplus_pole_polynomial(cs_matrix(), make_contour(-1))
        assert pi.coeffs == pytest.approx((0.0, 1.0 / 3.0, 1.0), abs=1e-12)


class TestSolveColumns:
    def test_identity(self):
        cols = solve_columns(identity_matrix(), make_contour(1), (1.0, 0.0))
        for f, expect in zip(cols.plus + cols.minus, (1, 0, 1, 0)):
            assert f(0.37 + 0.2j) == pytest.approx(expect, abs=1e-13)

    def test_eps_family_closed_forms(self):
        cols = solve_columns(eps_matrix(), make_contour(1), (1.0, 0.0))
        pts = np.exp(2j * np.pi * (np.arange(64) + 0.21) / 64)
        assert np.abs(column_at(cols, "plus", pts) - EPS.f_plus(pts)).max() < 1e-12
        assert np.abs(column_at(cols, "minus", pts) - EPS.f_minus(pts)).max() < 1e-12

    def test_cs_family_closed_forms(self):
        cols = solve_columns(cs_matrix(), make_contour(-1), (1.0, 0.0))
        pts = np.exp(2j * np.pi * (np.arange(64) + 0.21) / 64)
        assert np.abs(column_at(cols, "plus", pts) - CS.f_plus(pts)).max() < 1e-9
        assert np.abs(column_at(cols, "minus", pts) - CS.f_minus(pts)).max() < 1e-9

    @pytest.mark.parametrize("builder,lam", [(eps_matrix, 1), (cs_matrix, -1)])
    def test_boundary_identity(self, builder, lam):
        m = builder()
        cols = solve_columns(m, make_contour(lam), (1.0, 0.0))
        pts = np.exp(2j * np.pi * (np.arange(128) + 0.37) / 128)
        worst = 0.0
        for z in pts:
            lhs = m.at(z) @ np.array([cols.plus[0](z), cols.plus[1](z)])
            rhs = np.array([cols.minus[0](z), cols.minus[1](z)])
            worst = max(worst, np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max()))
        assert worst < 1e-9

    @pytest.mark.parametrize("builder,lam", [(eps_matrix, 1), (cs_matrix, -1)])
    def test_analyticity_certificates(self, builder, lam):
        c = make_contour(lam)
        cols = solve_columns(builder(), c, (1.0, 0.0))
        for f in cols.plus:
            for cl in f.poles():
                assert c.classify(cl.location) is PointClass.EXTERIOR
        for f in cols.minus:
            assert f.bounded_at_infinity
            for cl in f.poles():
                assert c.classify(cl.location) is PointClass.INTERIOR

    def test_second_norm_vector(self):
        # norm (0, 1) reproduces the second columns for the eps family
        cols = solve_columns(eps_matrix(), make_contour(1), (0.0, 1.0))
        pts = np.exp(2j * np.pi * (np.arange(32) + 0.11) / 32)
        assert np.abs(column_at(cols, "plus", pts) - EPS.s_plus(pts)).max() < 1e-10
        assert np.abs(column_at(cols, "minus", pts) - EPS.s_minus(pts)).max() < 1e-10

    def test_diag_tau_not_canonical(self):
        with pytest.raises(NonCanonical):
            solve_columns(tau_diag_matrix(), make_contour(1), (1.0, 0.0))

    def test_det_not_one_rejected(self):
        two, zero, one = CRational.const(2.0), CRational.zero_fn(), CRational.one()
        m = RationalMatrix2(entries=((two, zero), (zero, one)), symmetric=True)
        with pytest.raises(PrecondViolation):
            solve_columns(m, make_contour(1), (1.0, 0.0))


class TestKernelDimension:
    def test_cs_family_trivial_kernel(self):
        assert kernel_dimension(cs_matrix(), make_contour(-1)) == 0

    def test_eps_family_trivial_kernel(self):
        assert kernel_dimension(eps_matrix(), make_contour(1)) == 0

    def test_diag_tau_nontrivial_kernel(self):
        assert kernel_dimension(tau_diag_matrix(), make_contour(1)) >= 1

    def test_identity(self):
        assert kernel_dimension(identity_matrix(), make_contour(1)) == 0


class TestGalerkinOracle:
    """Brute-force Fourier-Galerkin solve agrees with the rational solution."""

    @pytest.mark.parametrize("family,builder,lam", [
        (EPS, eps_matrix, 1),
        (CS, cs_matrix, -1),
    ])
    def test_oracle_equivalence(self, family, builder, lam):
        cols = solve_columns(builder(), make_contour(lam), (1.0, 0.0))
        phi_plus, phi_minus = galerkin_columns(family.matrix_at, (1.0, 0.0))
        pts = np.exp(2j * np.pi * (np.arange(48) + 0.13) / 48)
        assert np.abs(phi_plus(pts) - column_at(cols, "plus", pts)).max() < 1e-8
        assert np.abs(phi_minus(pts) - column_at(cols, "minus", pts)).max() < 1e-8
