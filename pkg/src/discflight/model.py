"""
Physical parameters, radial grids, gridded densities and the drift field.

A :class:`RadialDensity` stores nodal values of ``P`` and interpolates the
amplitude ``Q = sqrt(P)`` with a cubic spline, so that ``P = Q**2`` stays
non-negative between nodes and the log-derivative ``P'/P = 2 Q'/Q`` is
available without dividing two small numbers near the wall.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DensityError
from .numerics import gauss_kronrod

__all__ = [
    "DriftField",
    "PhysicalParams",
    "RadialDensity",
    "RadialGrid",
    "angular_drift",
    "drift_field",
    "grid_quad",
    "mean_angular_velocity",
    "radial_drift",
    "strip_width",
    "winding_constant",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Disc radius ``R``, tangential speed ``V`` and diffusion coefficient ``D``."""

    R: float
    V: float
    D: float

    def __post_init__(self):
        for name in ("R", "V", "D"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
        if self.R <= 0 or self.D <= 0 or self.V < 0:
            raise ValueError("require R > 0, D > 0, V >= 0")

    @property
    def angular_velocity(self) -> float:
        """Mean angular velocity in radians per unit time, ``V / R``."""
        return self.V / self.R

    @property
    def turn_rate(self) -> float:
        """Mean angular velocity in turns per unit time, ``V / (2 pi R)``."""
        return self.V / (2.0 * math.pi * self.R)

    def to_dict(self) -> dict:
        return {"R": self.R, "V": self.V, "D": self.D}


def strip_width(params: PhysicalParams) -> float:
    """Localisation length ``R / mu**(1/3)`` of the Airy profile.

    Uses ``mu = (1 + (V R / D)**2) / 2``, the value obtained with the
    leading-order winding constant.
    """
    mu = 0.5 * (1.0 + (params.V * params.R / params.D) ** 2)
    return params.R / mu ** (1.0 / 3.0)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing radial nodes starting at the disc radius."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 16:
            raise ValueError("a radial grid needs at least 16 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, R: float, R_max: float, n: int = 2048) -> "RadialGrid":
        return cls(np.linspace(R, R_max, n))

    @classmethod
    def default(cls, params: PhysicalParams, n: int = 2048, span: float = 15.0) -> "RadialGrid":
        """``n`` uniform nodes on ``[R, R + span * strip_width]``."""
        return cls.uniform(params.R, params.R + span * strip_width(params), n)

    @property
    def R(self) -> float:
        return float(self.nodes[0])

    @property
    def R_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacing(self) -> float:
        """Largest node spacing."""
        return float(np.max(np.diff(self.nodes)))

    @property
    def is_uniform(self) -> bool:
        h = np.diff(self.nodes)
        return bool(np.allclose(h, h[0], rtol=1e-9, atol=0.0))

    def __len__(self):
        return self.nodes.size


def grid_quad(f: Callable, nodes: np.ndarray) -> tuple[float, float]:
    """Integrate ``f`` over ``[nodes[0], nodes[-1]]`` panel by panel.

    One 15-point Kronrod rule per grid interval; the integrands built from
    spline data are smooth on each interval. Returns ``(value, error)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    k, err, _ = gauss_kronrod(f, nodes[:-1], nodes[1:])
    return float(k.sum()), float(err.sum())


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Rotation-invariant areal density ``P(rho)`` sampled on a grid.

    Only non-negativity is enforced on construction; the wall condition
    and the normalisation are checked by :meth:`validate`, since truncated
    test profiles are legitimate inputs to some functionals.
    """

    grid: RadialGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.nodes.shape:
            raise DensityError("values and grid nodes differ in length")
        if not np.all(np.isfinite(vals)):
            raise DensityError("density values must be finite")
        if np.any(vals < 0):
            raise DensityError("density values must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_amplitude(cls, grid: RadialGrid, Q: np.ndarray, **meta) -> "RadialDensity":
        return cls(grid, np.square(Q), meta)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def R(self) -> float:
        return self.grid.R

    @cached_property
    def amplitude(self) -> CubicSpline:
        """Cubic spline of ``Q = sqrt(P)`` through the nodes."""
        return CubicSpline(self.nodes, np.sqrt(self.values))

    def __call__(self, rho):
        return self.amplitude(rho) ** 2

    def derivative(self, rho):
        """``dP/drho`` of the interpolant."""
        q = self.amplitude
        return 2.0 * q(rho) * q(rho, 1)

    def integral(self, weight: Callable) -> float:
        """``int P(rho) weight(rho) drho`` over the grid span."""
        return grid_quad(lambda r: self(r) * weight(r), self.nodes)[0]

    def mass(self) -> float:
        """``2 pi int rho P drho``."""
        return 2.0 * math.pi * self.integral(lambda r: r)

    def normalized(self) -> "RadialDensity":
        return RadialDensity(self.grid, self.values / self.mass(), dict(self.meta))

    def radial_cdf(self, rho=None, oversample: int = 8):
        """CDF of the radius, ``2 pi int_R^rho s P(s) ds``, normalised to 1 at ``R_max``.

        Returns ``(rho_fine, cdf)`` on an oversampled grid when ``rho`` is
        None, else the CDF interpolated at ``rho``.
        """
        n = len(self.nodes)
        fine = np.interp(np.linspace(0, n - 1, (n - 1) * oversample + 1),
                         np.arange(n), self.nodes)
        k, _, _ = gauss_kronrod(lambda r: 2.0 * math.pi * r * self(r), fine[:-1], fine[1:])
        cdf = np.concatenate([[0.0], np.cumsum(k)])
        cdf /= cdf[-1]
        if rho is None:
            return fine, cdf
        return np.interp(rho, fine, cdf)

    def quantile(self, p):
        fine, cdf = self.radial_cdf()
        return np.interp(p, cdf, fine)

    def interquartile_width(self) -> float:
        q1, q3 = self.quantile([0.25, 0.75])
        return float(q3 - q1)

    def validate(self, norm_tol: float | None = 1e-8) -> None:
        """Check wall condition and (optionally) normalisation.

        Raises
        ------
        DensityError
        """
        if self.values[0] != 0.0:
            raise DensityError("P(R) must vanish at the impenetrable wall")
        if norm_tol is not None:
            m = self.mass()
            if abs(m - 1.0) > norm_tol:
                raise DensityError(f"density mass {m!r} differs from 1 by more than {norm_tol}")

    # -- serialisation ----------------------------------------------------

    def to_csv(self, header_lines: list[str] | None = None) -> str:
        out = io.StringIO()
        for line in header_lines or []:
            out.write(f"# {line}\n")
        out.write("rho,P\n")
        for r, p in zip(self.nodes, self.values):
            out.write(f"{r:.17g},{p:.17g}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RadialDensity":
        rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.reader(rows)
        header = next(reader)
        if [h.strip() for h in header] != ["rho", "P"]:
            raise DensityError(f"unexpected CSV header {header!r}")
        data = np.array([[float(a), float(b)] for a, b in reader])
        return cls(RadialGrid(data[:, 0]), data[:, 1])

    def to_json(self) -> str:
        return json.dumps({
            "R": self.R,
            "nodes": [float(x) for x in self.nodes],
            "values": [float(x) for x in self.values],
        })

    @classmethod
    def from_json(cls, text: str) -> "RadialDensity":
        obj = json.loads(text)
        grid = RadialGrid(np.array(obj["nodes"], dtype=float))
        if grid.R != obj["R"]:
            raise DensityError("JSON field R does not match the first node")
        return cls(grid, np.array(obj["values"], dtype=float))


@dataclass(frozen=True)
class DriftField:
    """Rotation-invariant drift ``(v_rho, v_phi)`` valid on ``(R, R_max]``."""

    v_rho: Callable
    v_phi: Callable
    R: float
    R_max: float
    angular_moment: float = 0.0  # rho * v_phi, constant in rho


def radial_drift(P: RadialDensity, params: PhysicalParams) -> Callable:
    """Zero-flux radial drift ``v_rho = D P'/P``.

    The returned callable gives ``+inf`` wherever the interpolated density
    vanishes (the wall), flagging the integrable singularity instead of
    returning a spurious finite number.

    Raises
    ------
    DensityError
        If ``P`` is not strictly positive at an interior node.
    """
    interior = P.values[1:-1]
    if np.any(interior <= 0):
        raise DensityError("radial drift needs P > 0 at interior nodes")
    q = P.amplitude
    D = params.D

    def v_rho(rho):
        rho = np.asarray(rho, dtype=float)
        qv = q(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(qv > 0, 2.0 * D * q(rho, 1) / np.where(qv > 0, qv, 1.0), np.inf)
        return out[()] if out.ndim == 0 else out

    return v_rho


def winding_constant(P: RadialDensity) -> float:
    """``C = int P(rho)/rho drho``."""
    return P.integral(lambda r: 1.0 / r)


def angular_drift(P: RadialDensity, params: PhysicalParams) -> Callable:
    """Minimal-action tangential drift ``v_phi = V / (2 pi R rho C)``."""
    C = winding_constant(P)
    if not C > 0:
        raise DensityError("winding constant vanishes; density is degenerate")
    moment = params.V / (2.0 * math.pi * params.R * C)

    def v_phi(rho):
        return moment / np.asarray(rho, dtype=float)

    v_phi.moment = moment
    return v_phi


def drift_field(P: RadialDensity, params: PhysicalParams) -> DriftField:
    v_phi = angular_drift(P, params)
    return DriftField(radial_drift(P, params), v_phi, P.R, P.grid.R_max, v_phi.moment)


def mean_angular_velocity(P: RadialDensity, v_phi: Callable) -> float:
    """Ensemble mean of ``v_phi / rho``: ``2 pi int (v_phi/rho) P rho drho``."""
    return 2.0 * math.pi * P.integral(lambda r: v_phi(r))
