"""Quadrature oracle, closed forms, numeric CDF, and the sampler."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from exppoly.domain import Support, ThetaBi, ThetaUni
from exppoly.errors import DivergentIntegral
from exppoly.oracle import (
    closed_form_A,
    numeric_cdf,
    quad_A_bi,
    quad_moment_uni,
    sample_uni,
)

SQRT_PI = math.sqrt(math.pi)


def test_quad_exponential_moments_are_factorials():
    th = ThetaUni((-1.0,))
    for m in range(5):
        assert quad_moment_uni(th, m) == pytest.approx(math.factorial(m), rel=1e-10)


def test_quad_half_gaussian_moments():
    th = ThetaUni((0.0, -1.0))
    assert quad_moment_uni(th, 0) == pytest.approx(SQRT_PI / 2, rel=1e-11)
    assert quad_moment_uni(th, 1) == pytest.approx(0.5, rel=1e-11)
    assert quad_moment_uni(th, 2) == pytest.approx(SQRT_PI / 4, rel=1e-11)


def test_quad_realline_gaussian():
    th = ThetaUni((0.0, -1.0), Support.REAL_LINE)
    assert quad_moment_uni(th, 0) == pytest.approx(SQRT_PI, rel=1e-11)
    assert quad_moment_uni(th, 1) == pytest.approx(0.0, abs=1e-12)
    assert quad_moment_uni(th, 2) == pytest.approx(SQRT_PI / 2, rel=1e-11)


def test_quad_reduces_boundary_theta():
    # trailing zero: effectively the exponential model
    th = ThetaUni((-1.0, 0.0))
    assert quad_moment_uni(th, 0) == pytest.approx(1.0, rel=1e-10)


def test_quad_rejects_divergent():
    with pytest.raises(DivergentIntegral):
        quad_moment_uni(ThetaUni((1.0,)))
    with pytest.raises(DivergentIntegral):
        quad_moment_uni(ThetaUni((0.0, 0.0)))


def test_closed_form_values():
    assert closed_form_A(ThetaUni((-2.0,))) == pytest.approx(0.5)
    # truncated normal integral e^{1/4} (sqrt(pi)/2) erfc(1/2)
    assert closed_form_A(ThetaUni((-1.0, -1.0))) == pytest.approx(
        0.5456413607650469, rel=1e-14
    )
    assert closed_form_A(ThetaUni((1.0, -1.0), Support.REAL_LINE)) == pytest.approx(
        SQRT_PI * math.exp(0.25), rel=1e-14
    )


def test_closed_form_matches_quadrature():
    rng = np.random.default_rng(7)
    for _ in range(10):
        th = ThetaUni((rng.uniform(-2, 2), -rng.uniform(0.3, 2.0)))
        assert closed_form_A(th) == pytest.approx(quad_moment_uni(th), rel=1e-9)


def test_closed_form_requires_interior():
    with pytest.raises(DivergentIntegral):
        closed_form_A(ThetaUni((-1.0, 0.0)))


def test_quad_bivariate_product_point():
    th = ThetaBi(2, {(2, 0): -1.0, (0, 2): -1.0})
    assert quad_A_bi(th) == pytest.approx(math.pi / 4, rel=1e-9)
    assert quad_A_bi(th, st=(1, 0)) == pytest.approx(SQRT_PI / 4, rel=1e-9)
    assert quad_A_bi(th, st=(1, 1)) == pytest.approx(0.25, rel=1e-9)


def test_quad_bivariate_cross_term():
    # quadratic form with 2b = sqrt(2): A = pi/(4 sqrt(2))
    th = ThetaBi(2, {(2, 0): -1.0, (1, 1): -math.sqrt(2.0), (0, 2): -1.0})
    assert quad_A_bi(th) == pytest.approx(math.pi / (4 * math.sqrt(2)), rel=1e-9)


def test_quad_bivariate_rejects_improper():
    with pytest.raises(DivergentIntegral):
        quad_A_bi(ThetaBi(2, {(2, 0): 1.0, (0, 2): -1.0}))


def test_numeric_cdf_monotone():
    cdf, (lo, hi) = numeric_cdf(ThetaUni((-1.0, 3.0, -2.0)))
    xs = np.linspace(lo, hi, 200)
    us = cdf(xs)
    assert us[0] == pytest.approx(0.0, abs=1e-6)
    assert us[-1] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(us) >= -1e-12)


def test_sampler_deterministic_per_seed():
    th = ThetaUni((-1.0, 3.0, -2.0))
    a = sample_uni(th, 50, seed=123)
    b = sample_uni(th, 50, seed=123)
    c = sample_uni(th, 50, seed=124)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sampler_matches_cdf():
    th = ThetaUni((0.0, -1.0))
    x = sample_uni(th, 2000, seed=5)
    assert np.all(x > 0)
    cdf, _ = numeric_cdf(th)
    assert sps.kstest(x, cdf).pvalue > 0.01


def test_sampler_realline():
    th = ThetaUni((1.0, -1.0), Support.REAL_LINE)
    x = sample_uni(th, 2000, seed=6)
    # mean of exp(x - x^2) is 1/2
    assert float(np.mean(x)) == pytest.approx(0.5, abs=0.06)
