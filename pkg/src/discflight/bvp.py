"""
Ground state of the radial Euler-Lagrange problem and its self-consistency loop.

With ``U = sqrt(rho) Q`` the boundary problem becomes the Schroedinger-type
eigenproblem ``-U'' - Omega^2 / (4 rho^2) U = lam U`` with ``lam = -gamma / (4 D^2)``,
``U(R) = 0`` and decay at infinity. It is discretised by second-order
central differences on a uniform grid with a Dirichlet condition at a far
cutoff ``R_max``; the ground state (no interior nodes) is the lowest
``lam``, i.e. the *largest* bound ``gamma``. Further bound states pile up
at ``gamma -> 0`` because the ``1/rho^2`` well is long-ranged.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import kernels
from .asymptotic import (airy_amplitude_sq, asymptotic_density, leading_constant,
                         linearized_gamma, mu_of, omega_sq)
from .errors import AccuracyError, NoBoundStateError, NonConvergenceError
from .model import DriftField, PhysicalParams, RadialDensity, RadialGrid, winding_constant
from .numerics import airy_ai, airy_first_zero, find_root

__all__ = [
    "EigenSolution",
    "SelfConsistentSolution",
    "airy_profile_distance",
    "compare_with_asymptotic",
    "default_grid",
    "residual_of",
    "self_consistent_solve",
    "shoot",
    "shoot_ground_state",
    "solve_eigenproblem",
]


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Normalised ground state ``Q`` of the radial problem at fixed ``C``."""

    gamma: float
    Q: np.ndarray
    grid: RadialGrid
    residual_norm: float
    node_count: int
    C: float
    gamma_error: float = float("nan")
    excited_gamma: float = float("nan")
    excited_node_count: int = -1

    @property
    def density(self) -> RadialDensity:
        return RadialDensity.from_amplitude(self.grid, self.Q, source="bvp", C=self.C,
                                            gamma=self.gamma)


@dataclass(eq=False)
class SelfConsistentSolution:
    params: PhysicalParams
    C: float
    eigen: EigenSolution
    P: RadialDensity
    iterations: int
    C_history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "gamma": self.eigen.gamma,
            "C": self.C,
            "iterations": self.iterations,
            "residual_norm": self.eigen.residual_norm,
            "gamma_error": self.eigen.gamma_error,
            "node_count": self.eigen.node_count,
            "C_history": list(self.C_history),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def default_grid(params: PhysicalParams, C: float | None = None, n: int = 2048) -> RadialGrid:
    """Uniform grid reaching ``R + max(40 D / sqrt(gamma), 15 R / mu^(1/3))``.

    ``gamma`` and ``mu`` are the linearised estimates at ``C`` (default:
    leading order).
    """
    C = leading_constant(params) if C is None else C
    g = linearized_gamma(params, C)
    span = 15.0 * params.R / mu_of(params, C) ** (1.0 / 3.0)
    if g > 0:
        span = max(span, 40.0 * params.D / math.sqrt(g))
    return RadialGrid.uniform(params.R, params.R + span, n)


def _potential(params: PhysicalParams, C: float, rho: np.ndarray) -> np.ndarray:
    return -omega_sq(params, C) / (4.0 * rho ** 2)


def _uniform_step(grid: RadialGrid) -> float:
    if not grid.is_uniform:
        raise ValueError("the boundary-value solver needs a uniform grid")
    return (grid.R_max - grid.R) / (len(grid) - 1)


def _lowest_lams(pot: np.ndarray, h: float, count: int = 2) -> np.ndarray:
    inner = pot[1:-1]
    diag = 2.0 / h ** 2 + inner
    off = np.full(inner.size - 1, -1.0 / h ** 2)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                            select_range=(0, count - 1))


def _sign_changes(u: np.ndarray) -> int:
    s = np.sign(u)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _profile(pot, h, lam, rho):
    """Normalised ``Q`` for eigenvalue ``lam``; also returns ``U`` and its node count."""
    u = kernels.inward_profile(h, np.ascontiguousarray(pot), lam)
    u[0] = 0.0
    # orient so the bulk is positive
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    nodes = _sign_changes(u[1:-1])
    return u, nodes


def _residual(u, pot, h, lam):
    lap = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h ** 2
    r = -lap + (pot[1:-1] - lam) * u[1:-1]
    scale = max(np.max(np.abs(lap)), np.max(np.abs(pot[1:-1] * u[1:-1])),
                np.max(np.abs(lam * u[1:-1])))
    return float(np.max(np.abs(r)) / scale)


def solve_eigenproblem(params: PhysicalParams, C: float, grid: RadialGrid | None = None,
                       estimate_error: bool = True) -> EigenSolution:
    """Ground state ``(gamma, Q)`` at fixed winding constant ``C``.

    ``Q`` is normalised to ``2 pi int Q^2 rho drho = 1``. ``gamma_error``
    is a Richardson estimate from a grid with half as many intervals.

    Raises
    ------
    NoBoundStateError
        For ``V = 0`` or when no negative discrete eigenvalue exists.
    """
    if params.V <= 0:
        raise NoBoundStateError("no normalisable ground state without winding (V = 0)")
    if not C > 0:
        raise ValueError("winding constant must be positive")
    grid = grid or default_grid(params, C)
    h = _uniform_step(grid)
    rho = grid.nodes
    pot = _potential(params, C, rho)
    lam0, lam1 = _lowest_lams(pot, h, 2)
    if lam0 >= 0:
        raise NoBoundStateError(f"no bound state: lowest eigenvalue {lam0!r} >= 0")
    D2 = params.D ** 2
    gamma = float(-4.0 * D2 * lam0)

    u, nodes = _profile(pot, h, lam0, rho)
    u1, nodes1 = _profile(pot, h, lam1, rho)
    residual = _residual(u, pot, h, lam0)

    Q = u / np.sqrt(rho)
    # trapezoid weights match the discrete operator; Q vanishes at both ends
    mass = 2.0 * math.pi * h * np.sum(Q[1:-1] ** 2 * rho[1:-1])
    Q = Q / math.sqrt(mass)
    if Q[-1] > 1e-10 * Q.max() or np.any(Q[1:-1] <= 0):
        raise AccuracyError("ground state is not positive and decaying on the grid")

    gamma_err = float("nan")
    if estimate_error:
        coarse = RadialGrid.uniform(grid.R, grid.R_max, (len(grid) - 1) // 2 + 1)
        hc = _uniform_step(coarse)
        lam_c = _lowest_lams(_potential(params, C, coarse.nodes), hc, 1)[0]
        gamma_err = abs(gamma - (-4.0 * D2 * lam_c)) / 3.0
    return EigenSolution(
        gamma=gamma, Q=Q, grid=grid, residual_norm=residual, node_count=nodes, C=C,
        gamma_error=gamma_err, excited_gamma=float(-4.0 * D2 * lam1), excited_node_count=nodes1,
    )


def shoot(params: PhysicalParams, C: float, gamma: float, grid: RadialGrid) -> tuple[float, int]:
    """Shoot outward from the wall at trial ``gamma``.

    Returns ``(terminal_value, node_count)``; the terminal value changes
    sign at each discrete eigenvalue, and ``node_count`` equals the number
    of bound states with multiplier above ``gamma``.
    """
    h = _uniform_step(grid)
    pot = np.ascontiguousarray(_potential(params, C, grid.nodes))
    lam = -gamma / (4.0 * params.D ** 2)
    return kernels.sturm_shoot(h, pot, lam)


def shoot_ground_state(params: PhysicalParams, C: float, grid: RadialGrid | None = None,
                       tol: float = 1e-14) -> float:
    """Ground-state ``gamma`` by bisection on the shooting node count and Brent on the terminal value.

    Independent of the matrix eigen-solver; searches ``(0, 4 D^2 Omega^2 / R^2]``.
    """
    grid = grid or default_grid(params, C)
    top = 4.0 * params.D ** 2 * omega_sq(params, C) / params.R ** 2
    if shoot(params, C, top, grid)[1] != 0:
        raise NoBoundStateError("ground state above the search bracket")
    lo, hi = 0.0, top
    if shoot(params, C, lo, grid)[1] == 0:
        raise NoBoundStateError("no bound state with gamma > 0")
    # narrow to the window with exactly one state above lo and none above hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if shoot(params, C, mid, grid)[1] == 0:
            hi = mid
        else:
            lo = mid
        if shoot(params, C, lo, grid)[1] == 1:
            break
    return find_root(lambda g: shoot(params, C, g, grid)[0], lo, hi, tol * top)


def self_consistent_solve(params: PhysicalParams, tol: float = 1e-8, max_iter: int = 200,
                          damping: float = 0.5, C0: float | None = None,
                          grid: RadialGrid | None = None) -> SelfConsistentSolution:
    """Damped fixed-point iteration ``C <- (1 - theta) C + theta int Q^2 / rho``.

    Starts at the leading-order constant unless ``C0`` is given and stops
    when ``|int Q^2/rho - C| <= tol * C``; the returned ``C`` is the one
    the final eigenproblem was solved with.

    Raises
    ------
    NonConvergenceError
        When ``max_iter`` iterations do not meet ``tol``; carries the history.
    """
    if params.V <= 0:
        raise NoBoundStateError("no normalisable ground state without winding (V = 0)")
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    C = leading_constant(params) if C0 is None else C0
    grid = grid or default_grid(params)
    history = [C]
    for it in range(1, max_iter + 1):
        eig = solve_eigenproblem(params, C, grid, estimate_error=False)
        P = eig.density
        C_new = winding_constant(P)
        if abs(C_new - C) <= tol * C:
            eig = solve_eigenproblem(params, C, grid)
            return SelfConsistentSolution(params, C, eig, eig.density, it, history)
        C = (1.0 - damping) * C + damping * C_new
        history.append(C)
    raise NonConvergenceError(f"winding constant not converged in {max_iter} iterations", history)


def residual_of(P: RadialDensity, field: DriftField, params: PhysicalParams) -> dict:
    """Stationary radial Fokker-Planck residual and zero-flux check on the nodes.

    ``residual``: max over interior nodes of
    ``|D (rho P')' - (rho v_rho P)'|`` normalised by the larger of the two
    terms' maxima, both by central differences. ``flux``: max of
    ``|D P' - v_rho P|`` relative to ``max |D P'|`` with ``P'`` from the
    interpolant. The wall node uses the finite limit ``v_rho P -> 0``.
    """
    rho = P.nodes
    vals = P.values
    D = params.D
    with np.errstate(invalid="ignore"):
        vr = np.asarray(field.v_rho(rho), dtype=float)
        vp = np.where(vals > 0, vr * vals, 0.0)
    dP = P.derivative(rho)
    flux = float(np.max(np.abs(D * dP - vp)) / np.max(np.abs(D * dP)))

    hl = np.diff(rho)
    mid = 0.5 * (rho[1:] + rho[:-1])
    grad = mid * np.diff(vals) / hl
    term1 = D * (grad[1:] - grad[:-1]) / (0.5 * (hl[1:] + hl[:-1]))
    F = rho * vp
    term2 = (F[2:] - F[:-2]) / (rho[2:] - rho[:-2])
    scale = max(np.max(np.abs(term1)), np.max(np.abs(term2)))
    return {
        "residual": float(np.max(np.abs(term1 - term2)) / scale),
        "flux": flux,
        "h": P.grid.spacing,
    }


def airy_profile_distance(P: RadialDensity, params: PhysicalParams, x_max: float = 12.0,
                          n: int = 2001) -> float:
    """Sup-norm distance between ``Q sqrt(rho) / C1`` and ``Ai(x + a1)`` on ``[0, x_max]``.

    ``x = mu^(1/3) (rho - R) / R``; ``mu`` and ``C1`` use the leading-order
    constant so the reference profile does not depend on the solution.
    """
    c0 = leading_constant(params)
    m3 = mu_of(params, c0) ** (1.0 / 3.0)
    c1 = math.sqrt(airy_amplitude_sq(params, c0))
    x = np.linspace(0.0, x_max, n)
    rho = params.R + x * params.R / m3
    if rho[-1] > P.grid.R_max:
        raise ValueError("density grid does not cover the requested window")
    q = np.maximum(P.amplitude(rho), 0.0)
    return float(np.max(np.abs(q * np.sqrt(rho) / c1 - airy_ai(x + airy_first_zero()))))


def compare_with_asymptotic(solution: SelfConsistentSolution) -> dict:
    """One comparison row: BVP against the leading-order Airy density."""
    params = solution.params
    P = solution.P
    A = asymptotic_density(params)
    rho = P.nodes[P.nodes <= A.grid.R_max]
    diff = P(rho) - A(rho)
    weight = 2.0 * math.pi * rho
    gl = linearized_gamma(params, solution.C)
    return {
        "R": params.R,
        "V": params.V,
        "D": params.D,
        "C": solution.C,
        "leading_constant": leading_constant(params),
        "gamma": solution.eigen.gamma,
        "gamma_linearized": gl,
        "gamma_rel_dev": (solution.eigen.gamma - gl) / gl,
        "sup_norm": float(np.max(np.abs(diff)) / np.max(P.values)),
        "l1": float(np.trapezoid(np.abs(diff) * weight, rho)),
        "airy_profile_sup": airy_profile_distance(P, params),
    }
