import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discflight.errors import DensityError
from discflight.model import (PhysicalParams, RadialDensity, RadialGrid, angular_drift,
                              drift_field, grid_quad, mean_angular_velocity, radial_drift,
                              strip_width, winding_constant)


def _gamma_density(R=10.0, scale=1.0, n=400, span=30.0):
    """``P ~ (rho - R)^2 exp(-(rho - R)/scale)`` normalised with the area weight."""
    grid = RadialGrid.uniform(R, R + span * scale, n)
    s = grid.nodes - R
    vals = s ** 2 * np.exp(-s / scale)
    return RadialDensity(grid, vals).normalized()


class TestPhysicalParams:
    def test_rates(self):
        p = PhysicalParams(100.0, 2.0, 1.0)
        assert p.angular_velocity == pytest.approx(0.02)
        assert p.turn_rate == pytest.approx(0.02 / (2 * math.pi))
        assert p.to_dict() == {"R": 100.0, "V": 2.0, "D": 1.0}

    @pytest.mark.parametrize("args", [(0, 1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, 0),
                                      (math.nan, 1, 1), (1, math.inf, 1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            PhysicalParams(*args)

    def test_zero_speed_allowed(self):
        assert PhysicalParams(1.0, 0.0, 1.0).V == 0.0

    def test_frozen(self):
        p = PhysicalParams(1.0, 1.0, 1.0)
        with pytest.raises(AttributeError):
            p.R = 2.0


def test_strip_width_scaling():
    # for V R >> D the width is (2 D^2 / V^2)^(1/3) R^(1/3)
    p = PhysicalParams(1e4, 1.0, 1.0)
    assert strip_width(p) == pytest.approx(2 ** (1 / 3) * 1e4 ** (1 / 3), rel=1e-8)


class TestRadialGrid:
    def test_uniform_properties(self):
        g = RadialGrid.uniform(5.0, 15.0, 101)
        assert (g.R, g.R_max, len(g)) == (5.0, 15.0, 101)
        assert g.spacing == pytest.approx(0.1)
        assert g.is_uniform

    def test_non_uniform(self):
        assert not RadialGrid(np.linspace(0, 1, 20) ** 2 + 1).is_uniform

    @pytest.mark.parametrize("nodes", [np.linspace(0, 1, 10), np.r_[np.linspace(0, 1, 20), 0.5]])
    def test_invalid(self, nodes):
        with pytest.raises(ValueError):
            RadialGrid(nodes)

    def test_nodes_read_only(self):
        g = RadialGrid.uniform(1.0, 2.0, 20)
        with pytest.raises(ValueError):
            g.nodes[0] = 0.0


def test_grid_quad_polynomial():
    val, err = grid_quad(lambda r: r ** 5, np.linspace(1.0, 3.0, 17))
    assert val == pytest.approx((3 ** 6 - 1) / 6, rel=1e-14)
    assert err < 1e-10


class TestRadialDensity:
    def test_normalised_mass(self):
        P = _gamma_density()
        assert P.mass() == pytest.approx(1.0, rel=1e-12)
        P.validate()

    def test_rejects_negative_and_nonfinite(self):
        g = RadialGrid.uniform(1.0, 2.0, 20)
        with pytest.raises(DensityError):
            RadialDensity(g, -np.ones(20))
        with pytest.raises(DensityError):
            RadialDensity(g, np.full(20, np.nan))
        with pytest.raises(DensityError):
            RadialDensity(g, np.ones(19))

    def test_wall_condition(self):
        g = RadialGrid.uniform(1.0, 2.0, 20)
        with pytest.raises(DensityError):
            RadialDensity(g, np.ones(20)).validate(norm_tol=None)

    def test_mass_check(self):
        P = _gamma_density()
        bad = RadialDensity(P.grid, 2 * P.values)
        with pytest.raises(DensityError):
            bad.validate()

    def test_amplitude_interpolates(self):
        P = _gamma_density()
        assert np.allclose(P(P.nodes), P.values, rtol=1e-12, atol=1e-300)

    def test_cdf_and_quantiles(self):
        P = _gamma_density()
        fine, cdf = P.radial_cdf()
        assert cdf[0] == 0.0 and cdf[-1] == 1.0
        assert np.all(np.diff(cdf) >= 0)
        q1, q3 = P.quantile([0.25, 0.75])
        assert P.radial_cdf(q1) == pytest.approx(0.25, abs=1e-6)
        assert P.interquartile_width() == pytest.approx(q3 - q1)

    def test_csv_round_trip_is_lossless(self):
        P = _gamma_density()
        text = P.to_csv(["a header", "config {}"])
        assert text.startswith("# a header\n# config {}\nrho,P\n")
        Q = RadialDensity.from_csv(text)
        assert np.array_equal(Q.nodes, P.nodes)
        assert np.array_equal(Q.values, P.values)

    def test_csv_bad_header(self):
        with pytest.raises(DensityError):
            RadialDensity.from_csv("r,p\n1,0\n")

    def test_json_round_trip(self):
        P = _gamma_density()
        Q = RadialDensity.from_json(P.to_json())
        assert np.array_equal(Q.values, P.values)
        obj = json.loads(P.to_json())
        assert set(obj) == {"R", "nodes", "values"}
        obj["R"] = 0.0
        with pytest.raises(DensityError):
            RadialDensity.from_json(json.dumps(obj))


@given(st.lists(st.floats(min_value=1e-300, max_value=1e3, allow_subnormal=False),
                min_size=16, max_size=40),
       st.floats(min_value=1e-3, max_value=1e6))
@settings(max_examples=60, deadline=None)
def test_serialisation_round_trip_property(vals, R):
    g = RadialGrid(R + np.cumsum(np.full(len(vals), 0.5)) - 0.5)
    P = RadialDensity(g, np.r_[0.0, vals[1:]])
    for Q in (RadialDensity.from_csv(P.to_csv()), RadialDensity.from_json(P.to_json())):
        assert np.array_equal(Q.values, P.values)
        assert np.array_equal(Q.nodes, P.nodes)


class TestDrift:
    def test_zero_flux_identity(self):
        P = _gamma_density()
        params = PhysicalParams(P.R, 1.0, 0.7)
        v = radial_drift(P, params)
        r = np.linspace(P.R + 0.1, P.grid.R_max - 1.0, 200)
        assert np.allclose(params.D * P.derivative(r), v(r) * P(r), rtol=1e-12, atol=1e-300)

    def test_wall_singularity_flagged(self):
        P = _gamma_density()
        v = radial_drift(P, PhysicalParams(P.R, 1.0, 1.0))
        assert v(P.R) == math.inf
        # close to the wall v ~ 2 D / (rho - R)
        assert v(P.R + 1e-4) == pytest.approx(2.0 / 1e-4, rel=1e-2)

    def test_interior_zero_rejected(self):
        P = _gamma_density()
        vals = P.values.copy()
        vals[50] = 0.0
        with pytest.raises(DensityError):
            radial_drift(RadialDensity(P.grid, vals), PhysicalParams(P.R, 1.0, 1.0))

    def test_angular_constraint(self):
        P = _gamma_density()
        params = PhysicalParams(P.R, 3.0, 1.0)
        vphi = angular_drift(P, params)
        C = winding_constant(P)
        assert vphi.moment == pytest.approx(params.V / (2 * math.pi * params.R * C))
        assert mean_angular_velocity(P, vphi) == pytest.approx(params.V / params.R, rel=1e-12)

    def test_winding_constant_thin_shell(self):
        # a narrow shell at radius R has C ~ 1 / (2 pi R^2)
        P = _gamma_density(R=1e3, scale=1e-2)
        assert winding_constant(P) == pytest.approx(1 / (2 * math.pi * 1e6), rel=1e-4)

    def test_drift_field_bundle(self):
        P = _gamma_density()
        f = drift_field(P, PhysicalParams(P.R, 1.0, 1.0))
        assert (f.R, f.R_max) == (P.R, P.grid.R_max)
        assert f.v_phi(20.0) * 20.0 == pytest.approx(f.angular_moment)
