import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discflight.asymptotic import (airy_amplitude_sq, appendix_report, asymptotic_constants,
                                   asymptotic_density, first_order_constant, first_order_rhs,
                                   first_order_rhs_by_quadrature, leading_constant,
                                   limit_density, linearized_gamma, mu_of, omega_sq,
                                   self_consistent_constant, strip_width_exponent)
from discflight.errors import RegimeError
from discflight.model import PhysicalParams, winding_constant
from discflight.numerics import airy_ai_prime, airy_first_zero, airy_prime_first_zero

P100 = PhysicalParams(100.0, 1.0, 1.0)


def test_omega_and_mu_at_leading_constant():
    c0 = leading_constant(P100)
    assert c0 == pytest.approx(1 / (2 * math.pi * 1e4))
    assert omega_sq(P100, c0) == pytest.approx(1 + 1e4, rel=1e-14)
    assert mu_of(P100, c0) == pytest.approx(5000.5, rel=1e-14)
    with pytest.raises(ValueError):
        omega_sq(P100, 0.0)


def test_constants_json_keys_and_values():
    k = asymptotic_constants(P100)
    obj = json.loads(k.to_json())
    assert set(obj) == {"mu", "C", "C1_sq", "a1", "u", "v", "Omega_sq"}
    assert obj["mu"] == pytest.approx(5000, rel=1e-3)
    assert obj["C1_sq"] == pytest.approx(
        obj["mu"] ** (1 / 3) / (2 * math.pi * airy_ai_prime(obj["a1"]) ** 2 * 100.0))
    # the linearised multiplier places the wall at the first zero: -u/v = a1
    assert -k.u / k.v == pytest.approx(k.a1, rel=1e-12)


def test_linearized_gamma_formula():
    c0 = leading_constant(P100)
    w2 = omega_sq(P100, c0)
    a1 = abs(airy_first_zero())
    expect = (w2 - 2 ** (4 / 3) * a1 * w2 ** (2 / 3)) / 1e4
    assert linearized_gamma(P100, c0) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("R", [1e2, 1e3, 1e4])
def test_limit_density_normalisation(R):
    P = limit_density(PhysicalParams(R, 1.0, 1.0))
    assert abs(P.mass() - 1.0) <= 5.0 * R ** (-2.0 / 3.0)
    assert P.values[0] == 0.0


def test_asymptotic_density_shape(limit100):
    P = asymptotic_density(P100)
    assert P.values[0] == 0.0
    assert P.mass() == pytest.approx(1.0, abs=1e-3)
    # the peak sits where Ai(x + a1) peaks: x = a1' - a1
    m3 = mu_of(P100, leading_constant(P100)) ** (1 / 3)
    x_peak = airy_prime_first_zero() - airy_first_zero()
    r = np.linspace(100.0, 110.0, 20001)
    assert r[np.argmax(P(r) * r)] == pytest.approx(100 + x_peak * 100 / m3, abs=2e-3)
    # closed form and the generic C form agree to O(1/(VR/D)^2)
    rho = P.nodes[1:200]
    assert np.allclose(limit100(rho), P(rho), rtol=1e-3, atol=0)


def test_limit_density_pointwise_mode(limit100):
    r = np.array([99.0, 100.0, 101.0, 103.0])
    vals = limit_density(P100, rho=r)
    assert vals[0] == 0.0 and vals[1] == 0.0
    assert vals[2] == pytest.approx(limit100(101.0), rel=1e-6)


def test_limit_density_needs_winding():
    with pytest.raises(RegimeError):
        limit_density(PhysicalParams(100.0, 0.0, 1.0))


def test_winding_constant_of_airy_density_matches_first_order():
    p = PhysicalParams(1e4, 1.0, 1.0)
    c0 = leading_constant(p)
    C = winding_constant(asymptotic_density(p))
    # 1/rho = (1 - r/R + ...)/R shifts C below c0 at relative order mu^(-1/3)
    assert C < c0
    assert C == pytest.approx(first_order_rhs(p, c0), rel=1e-4)


class TestFirstOrder:
    def test_rhs_by_quadrature(self):
        for R in (50.0, 400.0, 5000.0):
            p = PhysicalParams(R, 1.0, 1.0)
            C = self_consistent_constant(p)
            assert first_order_rhs_by_quadrature(p, C) == pytest.approx(first_order_rhs(p, C),
                                                                        rel=1e-8)

    def test_root_solves_relation(self):
        C = self_consistent_constant(P100)
        assert C == pytest.approx(first_order_rhs(P100, C), rel=1e-13)

    def test_root_below_leading_and_approaching(self):
        devs = []
        for R in (50.0, 100.0, 400.0, 1600.0):
            p = PhysicalParams(R, 1.0, 1.0)
            devs.append(self_consistent_constant(p) / leading_constant(p) - 1.0)
        assert all(d < 0 for d in devs)
        assert all(abs(a) > abs(b) for a, b in zip(devs, devs[1:]))

    def test_large_R_expansion_converges(self):
        errs = []
        for R in (1e2, 1e3, 1e4):
            p = PhysicalParams(R, 1.0, 1.0)
            root = self_consistent_constant(p)
            errs.append(abs(first_order_constant(p) - root) / root)
        assert errs[0] > errs[1] > errs[2]

    def test_no_root_without_winding(self):
        p = PhysicalParams(100.0, 0.0, 1.0)
        with pytest.raises(RegimeError):
            self_consistent_constant(p)
        with pytest.raises(RegimeError):
            first_order_constant(p)

    @given(st.floats(min_value=20.0, max_value=1e5), st.floats(min_value=0.2, max_value=5.0),
           st.floats(min_value=0.2, max_value=5.0))
    @settings(max_examples=40, deadline=None)
    def test_root_unique_and_positive(self, R, V, D):
        p = PhysicalParams(R, V, D)
        C = self_consistent_constant(p)
        assert 0 < C < leading_constant(p)
        assert C == pytest.approx(first_order_rhs(p, C), rel=1e-10)


def test_appendix_report_informational():
    rep = appendix_report(PhysicalParams(400.0, 1.0, 1.0))
    assert rep["status"] == "informational"
    assert rep["self_consistent_constant"] < rep["leading_constant"]
    # the pi-factor form differs from the root; the no-pi form is first-order close
    assert abs(rep["pi_factor_form_rel_dev"]) > abs(rep["no_pi_form_rel_dev"])
    assert np.isfinite(rep["quartic_form_rel_dev"])


def test_amplitude_normalises_airy_square():
    c0 = leading_constant(P100)
    m3 = mu_of(P100, c0) ** (1 / 3)
    # 2 pi C1^2 (R/m3) Ai'(a1)^2 = 1 up to the 1/rho -> 1/R replacement
    assert 2 * math.pi * airy_amplitude_sq(P100, c0) * 100 / m3 * airy_ai_prime(
        airy_first_zero()) ** 2 == pytest.approx(1.0, rel=1e-12)


def test_strip_width_exponent():
    base = PhysicalParams(1.0, 1.0, 1.0)
    assert strip_width_exponent(base, [1e2, 1e3, 1e4, 1e5]) == pytest.approx(1 / 3, abs=0.01)
    with pytest.raises(ValueError):
        strip_width_exponent(base, [1e2, 1e3, 1e4])
    with pytest.raises(ValueError):
        strip_width_exponent(base, [100, 200, 400, 800])
