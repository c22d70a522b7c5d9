import json
import math

import numpy as np
import pytest

from discflight.asymptotic import asymptotic_density, leading_constant, mu_of
from discflight.errors import DensityError
from discflight.model import DriftField, PhysicalParams, RadialDensity, drift_field, winding_constant
from discflight.numerics import airy_first_zero
from discflight.variational import (ActionBreakdown, action_of_density, action_of_velocity,
                                    verify_minimality)


def test_breakdown_total():
    b = ActionBreakdown(1.5, 2.0)
    assert b.total == 3.5
    assert ActionBreakdown(1.5, 2.0, 0.25).total == 3.75
    assert ActionBreakdown(1.5, 2.0, 0.25).to_dict() == {
        "radial_term": 1.5, "angular_term": 2.0, "lagrange_term": 0.25, "total": 3.75}


def test_zero_field(limit100):
    zero = DriftField(lambda r: 0.0 * np.asarray(r), lambda r: 0.0 * np.asarray(r), 100.0, 1e9)
    assert action_of_velocity(limit100, zero) == 0.0


def test_pure_rotation(params100):
    P = asymptotic_density(params100)
    V, R = params100.V, params100.R
    field = DriftField(lambda r: 0.0 * np.asarray(r), lambda r: V * R / np.asarray(r), R, 1e9)
    expect = 2 * math.pi * V ** 2 * R ** 2 * winding_constant(P)
    assert action_of_velocity(P, field) == pytest.approx(expect, rel=1e-12)
    # 2 pi R^2 C -> 1 only slowly, as 1 - O((D/(V R))^(2/3))
    big = PhysicalParams(1e5, 1.0, 1.0)
    c = winding_constant(asymptotic_density(big))
    assert 2 * math.pi * big.R ** 2 * c == pytest.approx(1.0, rel=0.05)


def test_velocity_and_density_forms_agree(solution100, params100):
    P = solution100.P
    av = action_of_velocity(P, drift_field(P, params100))
    b = action_of_density(P, params100)
    assert b.radial_term >= 0 and b.angular_term >= 0
    assert av == pytest.approx(b.total, rel=1e-10)


def test_lagrange_term(solution100, params100):
    b = action_of_density(solution100.P, params100, gamma=solution100.eigen.gamma)
    assert b.lagrange_term == pytest.approx(solution100.eigen.gamma, rel=1e-8)


def test_radial_term_airy_scaling():
    # for the Airy profile the radial cost is (4/3)|a1| D^2 mu^(2/3) / R^2
    p = PhysicalParams(2000.0, 1.0, 1.0)
    P = asymptotic_density(p)
    mu = mu_of(p, leading_constant(p))
    expect = 4.0 / 3.0 * abs(airy_first_zero()) * mu ** (2 / 3) / p.R ** 2
    assert action_of_density(P, p).radial_term == pytest.approx(expect, rel=0.02)


def test_interior_zero_rejected(limit100, params100):
    vals = limit100.values.copy()
    vals[100] = 0.0
    with pytest.raises(DensityError):
        action_of_density(RadialDensity(limit100.grid, vals), params100)


class TestMinimality:
    def test_converged_solution_is_minimal(self, solution100, params100):
        rep = verify_minimality(solution100.P, params100, n_perturbations=50, seed=0)
        assert rep.passed, rep.failures
        assert min(rep.curvatures) > 0
        assert rep.max_stationarity_ratio <= 1e-4
        assert all(e["delta_action"] >= -rep.noise_floor for e in rep.entries)
        assert len(json.loads(rep.to_json())) == 50 * 4

    def test_seeded(self, solution100, params100):
        a = verify_minimality(solution100.P, params100, n_perturbations=10, seed=3)
        b = verify_minimality(solution100.P, params100, n_perturbations=10, seed=3)
        assert a.entries == b.entries

    def test_non_minimiser_detected(self, params100):
        # the Airy density is close to but not at the minimum of the full functional
        P = asymptotic_density(PhysicalParams(20.0, 1.0, 1.0))
        rep = verify_minimality(P, PhysicalParams(20.0, 1.0, 1.0), n_perturbations=10)
        assert not rep.passed
        assert any("first variation too large" in f["reasons"] for f in rep.failures)

    def test_needs_enough_perturbations(self, solution100, params100):
        with pytest.raises(ValueError):
            verify_minimality(solution100.P, params100, n_perturbations=5)
