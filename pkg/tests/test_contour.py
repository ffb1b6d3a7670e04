import numpy as np
import pytest

from whfact import (
    BadLambda,
    BranchPointNearContour,
    PointClass,
    check_branch_separation,
    classify_point,
    make_contour,
    sample,
)


class TestMakeContour:
    def test_negative_lambda(self):
        c = make_contour(-1)
        assert c.involution(2.0) == pytest.approx(0.5)

    def test_positive_lambda(self):
        c = make_contour(1)
        assert c.involution(2.0) == pytest.approx(-0.5)

    def test_bad_lambda(self):
        with pytest.raises(BadLambda):
            make_contour(2)

    @pytest.mark.parametrize("lam", [1, -1])
    def test_involution_preserves_circle(self, lam):
        c = make_contour(lam)
        for z in c.sample(32):
            assert abs(abs(c.involution(z)) - 1.0) <= 1e-14

    @pytest.mark.parametrize("lam", [1, -1])
    def test_involution_swaps_sides(self, lam):
        c = make_contour(lam)
        rng = np.random.default_rng(2)
        for _ in range(20):
            z = rng.uniform(0.1, 0.9) * np.exp(2j * np.pi * rng.uniform())
            assert classify_point(c, z) is PointClass.INTERIOR
            assert classify_point(c, c.involution(z)) is PointClass.EXTERIOR


class TestClassifyPoint:
    def setup_method(self):
        self.c = make_contour(1)

    def test_interior(self):
        assert classify_point(self.c, -0.5) is PointClass.INTERIOR

    def test_exterior(self):
        assert classify_point(self.c, 2.0) is PointClass.EXTERIOR

    def test_on_contour(self):
        assert classify_point(self.c, 1.0) is PointClass.ON_CONTOUR

    def test_band_positive(self):
        with pytest.raises(ValueError):
            classify_point(self.c, 0.5, band=0.0)


class TestSample:
    def test_four_points(self):
        pts = sample(make_contour(1), 4)
        np.testing.assert_allclose(pts, [1.0, 1j, -1.0, -1j], atol=1e-15)

    def test_too_few(self):
        with pytest.raises(ValueError):
            sample(make_contour(1), 2)

    def test_eighth_root(self):
        pts = sample(make_contour(-1), 8)
        assert np.abs(pts - np.exp(1j * np.pi / 4)).min() < 1e-14


class TestBranchSeparation:
    def test_ok_eps_family(self):
        check_branch_separation(make_contour(1), -0.5, 2.0)

    def test_ok_cs_family(self):
        check_branch_separation(make_contour(-1), -1.0 / 3.0, -3.0)

    def test_inside_margin_band(self):
        with pytest.raises(BranchPointNearContour):
            check_branch_separation(make_contour(1), 0.99, 1.0 / 0.99)

    def test_margin_validation(self):
        with pytest.raises(ValueError):
            check_branch_separation(make_contour(1), -0.5, 2.0, margin=0.7)
