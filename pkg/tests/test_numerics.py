import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from discflight.errors import AccuracyError, BracketError, DomainError
from discflight.numerics import (AiryZero, Quadrature, airy_ai, airy_ai_prime, airy_first_zero,
                                 airy_prime_first_zero, airy_zero, fault_injection, find_root,
                                 integrate)


def _maclaurin(x, terms=60):
    """Independent power-series oracle for (Ai, Ai') near the origin."""
    c1 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
    c2 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)
    f = g = 0.0
    fp = gp = 0.0
    tf, tg = 1.0, x
    for k in range(terms):
        f += tf
        g += tg
        if k > 0:
            fp += tf * (3 * k) / x if x else 0.0
        gp += tg * (3 * k + 1) / x if x else (1.0 if k == 0 else 0.0)
        tf *= x ** 3 / ((3 * k + 2) * (3 * k + 3))
        tg *= x ** 3 / ((3 * k + 3) * (3 * k + 4))
    return c1 * f - c2 * g, c1 * fp - c2 * gp


def test_ai_at_origin_matches_series():
    assert airy_ai(0.0) == pytest.approx(0.3550280539, abs=1e-10)
    assert airy_ai_prime(0.0) == pytest.approx(-0.2588194038, abs=1e-10)


@pytest.mark.parametrize("x", [-3.0, -1.5, -0.5, 0.7, 2.0, 3.5])
def test_series_oracle_off_origin(x):
    ai, aip = _maclaurin(x)
    assert airy_ai(x) == pytest.approx(ai, abs=1e-12)
    assert airy_ai_prime(x) == pytest.approx(aip, abs=1e-10)


def test_against_scipy_on_window():
    x = np.linspace(-20.0, 20.0, 4001)
    ai, aip, _, _ = special.airy(x)
    assert np.max(np.abs(airy_ai(x) - ai)) <= 1e-12
    assert np.max(np.abs(airy_ai_prime(x) - aip)) <= 1e-10


@given(st.floats(min_value=-20.0, max_value=20.0))
@settings(max_examples=300, deadline=None)
def test_against_scipy_property(x):
    ai, aip, _, _ = special.airy(x)
    assert abs(airy_ai(x) - ai) <= 1e-12
    assert abs(airy_ai_prime(x) - aip) <= 1e-10


def test_far_arguments_agree_with_scipy():
    x = np.array([-60.0, -30.0, -21.5, 8.5, 12.0, 30.0])
    ai, aip, _, _ = special.airy(x)
    assert np.allclose(airy_ai(x), ai, rtol=1e-9, atol=1e-13)
    assert np.allclose(airy_ai_prime(x), aip, rtol=1e-9, atol=1e-12)


def test_positive_axis_decay():
    assert 0.0 < airy_ai(10.0) < 1e-9
    x = np.linspace(airy_prime_first_zero(), 15.0, 200)
    assert np.all(np.diff(airy_ai(x)) < 0)


@pytest.mark.parametrize("x", [-2.0, 0.0, 2.0])
def test_derivative_by_central_difference(x):
    errs = []
    for h in (1e-2, 5e-3):
        fd = (airy_ai(x + h) - airy_ai(x - h)) / (2 * h)
        errs.append(abs(fd - airy_ai_prime(x)))
    assert errs[1] < errs[0] / 3.0  # second order


def test_scalar_and_array_shapes():
    assert np.ndim(airy_ai(1.0)) == 0
    assert airy_ai(np.zeros((3, 2))).shape == (3, 2)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_rejected(bad):
    with pytest.raises(DomainError):
        airy_ai(bad)
    with pytest.raises(DomainError):
        airy_ai_prime(bad)


def test_first_zero():
    a1 = airy_first_zero()
    assert a1 == pytest.approx(-2.33811, abs=1e-5)
    assert abs(airy_ai(a1)) < 1e-12
    assert airy_ai_prime(a1) == pytest.approx(0.70121, abs=1e-5)
    assert airy_ai_prime(a1) > 0
    assert abs(airy_ai(-2.33811)) < 1e-5


def test_zero_sequence():
    ref = special.ai_zeros(6)[0]
    zs = [airy_zero(k) for k in range(1, 7)]
    assert np.allclose([z.location for z in zs], ref, atol=1e-12)
    assert all(abs(zs[i].location) < abs(zs[i + 1].location) for i in range(5))
    with pytest.raises(ValueError):
        airy_zero(0)
    with pytest.raises(ValueError):
        AiryZero(1, 0.5)


def test_prime_first_zero():
    assert airy_prime_first_zero() == pytest.approx(special.ai_zeros(1)[1][0], abs=1e-12)


def test_exact_airy_integrals():
    a1 = airy_first_zero()
    d2 = airy_ai_prime(a1) ** 2
    q = Quadrature(abs_tol=1e-300, rel_tol=1e-13)
    i0 = integrate(lambda x: airy_ai(x + a1) ** 2, 0.0, np.inf, q)
    i1 = integrate(lambda x: x * airy_ai(x + a1) ** 2, 0.0, np.inf, q)
    assert i0 == pytest.approx(d2, rel=1e-10)
    assert i1 == pytest.approx(2.0 / 3.0 * abs(a1) * d2, rel=1e-10)


def test_fault_injection_scales_and_restores():
    base = airy_ai(0.3)
    with fault_injection(1.01):
        assert airy_ai(0.3) == pytest.approx(1.01 * base, rel=1e-15)
    assert airy_ai(0.3) == base


class TestIntegrate:
    def test_polynomial_exact(self):
        assert integrate(lambda x: 3 * x ** 2, 0.0, 2.0) == pytest.approx(8.0, rel=1e-14)

    def test_semi_infinite_exponential(self):
        assert integrate(lambda x: np.exp(-x), 0.0, np.inf) == pytest.approx(1.0, rel=1e-12)

    def test_semi_infinite_gaussian_with_scale(self):
        val = integrate(lambda x: np.exp(-(x / 50.0) ** 2), 0.0, np.inf, scale=50.0)
        assert val == pytest.approx(25.0 * math.sqrt(math.pi), rel=1e-12)

    def test_singular_derivative_at_endpoint(self):
        q = Quadrature(abs_tol=1e-13, rel_tol=1e-11)
        assert integrate(np.sqrt, 0.0, 1.0, q) == pytest.approx(2.0 / 3.0, rel=1e-10)

    def test_depth_budget_raises_with_estimate(self):
        q = Quadrature(abs_tol=1e-15, rel_tol=1e-15, max_depth=1)
        with pytest.raises(AccuracyError) as err:
            integrate(lambda x: np.sin(1.0 / (x + 1e-3)), 0.0, 1.0, q)
        assert np.isfinite(err.value.estimate)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            integrate(lambda x: x, 1.0, 1.0)

    @pytest.mark.parametrize("kw", [dict(abs_tol=0.0), dict(rel_tol=-1.0), dict(max_depth=0)])
    def test_quadrature_invariants(self, kw):
        with pytest.raises(ValueError):
            Quadrature(**kw)


class TestFindRoot:
    def test_cubic(self):
        assert find_root(lambda x: x ** 3 - 2.0, 0.0, 2.0) == pytest.approx(2 ** (1 / 3), abs=1e-12)

    def test_endpoint_root(self):
        assert find_root(lambda x: x, 0.0, 1.0) == 0.0

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, -1.0, 1.0)
