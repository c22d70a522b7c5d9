"""
Action functionals and a numerical minimality check.

The action of a drift field is ``2 pi int (v_rho^2 + v_phi^2) P rho drho``.
For the zero-flux radial drift and the constrained tangential drift it
reduces to a functional of the density alone; the radial part is computed
from the amplitude ``Q = sqrt(P)`` as ``8 pi D^2 int Q'^2 rho drho`` so the
wall, where ``P'/P`` diverges, never needs special treatment.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import BSpline

from .errors import DensityError
from .model import (DriftField, PhysicalParams, RadialDensity, grid_quad, strip_width,
                    winding_constant)

__all__ = [
    "ActionBreakdown",
    "MinimalityReport",
    "action_of_density",
    "action_of_velocity",
    "verify_minimality",
]


@dataclass(frozen=True)
class ActionBreakdown:
    radial_term: float
    angular_term: float
    lagrange_term: float | None = None

    @property
    def total(self) -> float:
        t = self.radial_term + self.angular_term
        if self.lagrange_term is not None:
            t += self.lagrange_term
        return t

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


def action_of_velocity(P: RadialDensity, field: DriftField) -> float:
    """``2 pi int (v_rho^2 + v_phi^2) P rho drho`` over the grid span.

    Gauss-Kronrod nodes are interior to every panel, so the wall value of
    ``v_rho`` is never sampled; ``v_rho^2 P`` stays bounded next to it.
    """
    def integrand(r):
        p = P(r)
        with np.errstate(invalid="ignore"):
            vr2p = np.where(p > 0, np.asarray(field.v_rho(r)) ** 2 * p, 0.0)
        return (vr2p + np.asarray(field.v_phi(r)) ** 2 * p) * r

    return 2.0 * math.pi * grid_quad(integrand, P.nodes)[0]


def action_of_density(P: RadialDensity, params: PhysicalParams,
                      gamma: float | None = None) -> ActionBreakdown:
    """Radial and angular cost of ``P``; adds ``2 pi gamma int P rho`` when ``gamma`` is given.

    Raises
    ------
    DensityError
        If ``P`` vanishes at an interior node.
    """
    if np.any(P.values[1:-1] <= 0):
        raise DensityError("action needs P > 0 at interior nodes")
    q = P.amplitude
    radial = 8.0 * math.pi * params.D ** 2 * grid_quad(lambda r: q(r, 1) ** 2 * r, P.nodes)[0]
    C = winding_constant(P)
    angular = params.V ** 2 / (2.0 * math.pi * params.R ** 2 * C)
    lagrange = None if gamma is None else gamma * P.mass()
    return ActionBreakdown(radial, angular, lagrange)


# ---------------------------------------------------------------------------
# minimality
# ---------------------------------------------------------------------------

@dataclass
class MinimalityReport:
    entries: list
    curvatures: list
    first_variations: list
    failures: list
    noise_floor: float

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_stationarity_ratio(self) -> float:
        return max(abs(a) / abs(2.0 * b) for a, b in zip(self.first_variations, self.curvatures))

    def to_json(self) -> str:
        return json.dumps(self.entries)


def _bump(rng: np.random.Generator, params: PhysicalParams, rho: np.ndarray) -> np.ndarray:
    w = strip_width(params)
    center = params.R + rng.uniform(1.0, 4.0) * w
    half = rng.uniform(0.3, 1.2) * w
    half = min(half, center - params.R - 0.5 * w)
    knots = center + half * np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    b = BSpline.basis_element(knots, extrapolate=False)(rho)
    return np.nan_to_num(b)


def _total(P, params):
    return action_of_density(P, params).total


def verify_minimality(Q_star: RadialDensity, params: PhysicalParams, n_perturbations: int = 50,
                      seed: int = 0, epsilons=(1e-2, -1e-2, 1e-3, -1e-3),
                      noise_floor: float = 1e-10, stationarity: float = 1e-4) -> MinimalityReport:
    """Perturb the ground-state amplitude and check the action does not drop.

    Each perturbation is a cubic B-spline bump placed inside the strip
    from its own stream ``default_rng([seed, index])``, made orthogonal to
    ``Q`` in the ``rho``-weighted inner product and scaled to ``max Q``.
    The perturbed density ``(Q + eps eta)^2`` is renormalised exactly.
    A fit ``dS = a eps + b eps^2`` gives first and second variations.

    ``Q_star`` is the converged density (its amplitude is ``sqrt(P)``).
    """
    if n_perturbations < 10:
        raise ValueError("use at least 10 perturbations")
    rho = Q_star.nodes
    Q = np.sqrt(Q_star.values)
    S0 = _total(Q_star, params)
    floor = noise_floor * abs(S0)
    eps = np.asarray(epsilons, dtype=float)
    design = np.column_stack([eps, eps ** 2])

    entries, curv, first, failures = [], [], [], []
    for i in range(n_perturbations):
        rng = np.random.default_rng([seed, i])
        eta = _bump(rng, params, rho)
        # rho-weighted projection out of Q keeps the mass fixed to first order
        wq = grid_quad_nodes(Q * eta * rho, rho) / grid_quad_nodes(Q * Q * rho, rho)
        eta = eta - wq * Q
        eta *= Q.max() / np.max(np.abs(eta))
        eta[0] = 0.0
        dS = []
        for e in eps:
            Pe = RadialDensity(Q_star.grid, (Q + e * eta) ** 2).normalized()
            d = _total(Pe, params) - S0
            dS.append(d)
            entries.append({"perturbation_id": i, "epsilon": float(e), "delta_action": float(d)})
        dS = np.array(dS)
        (a, b), *_ = np.linalg.lstsq(design, dS, rcond=None)
        curv.append(float(b))
        first.append(float(a))
        bad = []
        if np.any(dS < -floor):
            bad.append("action decreased")
        if not b > 0:
            bad.append("non-positive curvature")
        if abs(a) > stationarity * abs(2.0 * b):
            bad.append("first variation too large")
        if bad:
            failures.append({"perturbation_id": i, "reasons": bad,
                             "eta": [float(v) for v in eta]})
    return MinimalityReport(entries, curv, first, failures, floor)


def grid_quad_nodes(values: np.ndarray, rho: np.ndarray) -> float:
    """Trapezoid rule for nodal data."""
    return float(np.trapezoid(values, rho))
