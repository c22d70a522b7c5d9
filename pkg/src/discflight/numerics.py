"""
Special functions, quadrature and root finding.

Airy functions are evaluated without external special-function libraries:
a table of (Ai, Ai') anchors is built once at import by Taylor-stepping the
Airy ODE ``y'' = x y`` in the numerically stable direction, and values at
arbitrary points come from a short Taylor expansion about the nearest
anchor. Outside the table the classical asymptotic expansions take over.

Quadrature is an adaptive Gauss-Kronrod (7/15) rule vectorised over
panels; semi-infinite upper limits are handled by marching panels of
geometrically growing width until the integrand is negligible.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import AccuracyError, BracketError, DomainError

__all__ = [
    "AccuracyError",
    "AiryZero",
    "BracketError",
    "DomainError",
    "Quadrature",
    "airy_ai",
    "airy_ai_prime",
    "airy_first_zero",
    "airy_prime_first_zero",
    "airy_zero",
    "fault_injection",
    "find_root",
    "integrate",
]


# ---------------------------------------------------------------------------
# Airy functions
# ---------------------------------------------------------------------------

_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))

_ANCHOR_STEP = 0.25
_X_LO = -21.0
_X_HI = 8.0
_TAYLOR_TERMS = 32


def _asym_coefficients(n: int) -> tuple[np.ndarray, np.ndarray]:
    # u_k = Gamma(3k+1/2) / (54^k k! Gamma(k+1/2)), v_k = -(6k+1)/(6k-1) u_k
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _asym_coefficients(24)


def _asym_positive(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = 2.0 / 3.0 * x ** 1.5
    s_u = np.zeros_like(x)
    s_v = np.zeros_like(x)
    # zeta >= 15 here; 12 terms are well inside the convergent stretch
    for k in range(12):
        w = (-1.0) ** k / zeta ** k
        s_u += _U[k] * w
        s_v += _V[k] * w
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    q = x ** 0.25
    return pref / q * s_u, -pref * q * s_v


def _asym_negative(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = -x
    zeta = 2.0 / 3.0 * z ** 1.5
    eu = np.zeros_like(z)
    ou = np.zeros_like(z)
    ev = np.zeros_like(z)
    ov = np.zeros_like(z)
    for k in range(6):
        sgn = (-1.0) ** k
        eu += sgn * _U[2 * k] / zeta ** (2 * k)
        ou += sgn * _U[2 * k + 1] / zeta ** (2 * k + 1)
        ev += sgn * _V[2 * k] / zeta ** (2 * k)
        ov += sgn * _V[2 * k + 1] / zeta ** (2 * k + 1)
    c = np.cos(zeta - math.pi / 4.0)
    s = np.sin(zeta - math.pi / 4.0)
    q = z ** 0.25
    sp = math.sqrt(math.pi)
    ai = (c * eu + s * ou) / (sp * q)
    aip = q * (s * ev - c * ov) / sp
    return ai, aip


def _taylor(x0, y0, yp0, t, terms=_TAYLOR_TERMS):
    """Evaluate the Airy-ODE solution through (x0, y0, yp0) at x0 + t."""
    c_prev = y0                      # c_{n-1}
    c_cur = yp0                      # c_n, n = 1
    c_prev2 = np.zeros_like(y0)      # c_{n-2}
    val = y0 + yp0 * t
    der = yp0.copy() if isinstance(yp0, np.ndarray) else yp0
    tp = t                           # t^n for n = 1
    # c_{n+1} = (x0 c_{n-1} + c_{n-2}) / (n (n+1))
    for n in range(1, terms):
        c_next = (x0 * c_prev + c_prev2) / (n * (n + 1))
        der = der + (n + 1) * c_next * tp
        tp = tp * t
        val = val + c_next * tp
        c_prev2, c_prev, c_cur = c_prev, c_cur, c_next
    return val, der


def _build_anchors():
    n_neg = int(round(-_X_LO / _ANCHOR_STEP))
    n_pos = int(round(_X_HI / _ANCHOR_STEP))
    xs = _X_LO + _ANCHOR_STEP * np.arange(n_neg + n_pos + 1)
    ai = np.empty_like(xs)
    aip = np.empty_like(xs)
    # leftwards from 0 into the oscillatory region is stable
    y, yp = _AI0, _AIP0
    ai[n_neg], aip[n_neg] = y, yp
    for i in range(n_neg - 1, -1, -1):
        y, yp = _taylor(xs[i + 1], y, yp, -_ANCHOR_STEP)
        ai[i], aip[i] = y, yp
    # leftwards from the asymptotic region keeps Bi contamination decaying
    ya, ypa = _asym_positive(np.array([_X_HI]))
    y, yp = float(ya[0]), float(ypa[0])
    ai[-1], aip[-1] = y, yp
    for i in range(len(xs) - 2, n_neg, -1):
        y, yp = _taylor(xs[i + 1], y, yp, -_ANCHOR_STEP)
        ai[i], aip[i] = y, yp
    return xs, ai, aip


_ANCHOR_X, _ANCHOR_AI, _ANCHOR_AIP = _build_anchors()


def _airy_pair(x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("Airy functions require finite arguments")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ai = np.empty_like(x)
    aip = np.empty_like(x)

    mid = (x >= _X_LO) & (x <= _X_HI)
    if mid.any():
        xm = x[mid]
        idx = np.rint((xm - _X_LO) / _ANCHOR_STEP).astype(int)
        x0 = _ANCHOR_X[idx]
        ai[mid], aip[mid] = _taylor(x0, _ANCHOR_AI[idx], _ANCHOR_AIP[idx], xm - x0)
    hi = x > _X_HI
    if hi.any():
        ai[hi], aip[hi] = _asym_positive(x[hi])
    lo = x < _X_LO
    if lo.any():
        ai[lo], aip[lo] = _asym_negative(x[lo])
    if scalar:
        return ai[0], aip[0]
    return ai, aip


_FAULT_SCALE = 1.0


def airy_ai(x):
    """Airy function Ai(x) for real, finite ``x`` (scalar or array).

    Absolute error is below 1e-12 on ``|x| <= 20``.
    """
    return _FAULT_SCALE * _airy_pair(x)[0]


def airy_ai_prime(x):
    """Derivative Ai'(x) for real, finite ``x`` (scalar or array)."""
    return _airy_pair(x)[1]


@contextmanager
def fault_injection(scale: float):
    """Scale every Ai value by ``scale`` while active (negative-control hook)."""
    global _FAULT_SCALE
    old = _FAULT_SCALE
    _FAULT_SCALE = float(scale)
    try:
        yield
    finally:
        _FAULT_SCALE = old


@dataclass(frozen=True)
class AiryZero:
    """The k-th zero ``a_k`` of Ai (negative, increasing in magnitude)."""

    index: int
    location: float

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("Airy zero index must be >= 1")
        if not self.location < 0:
            raise ValueError("Airy zeros are negative")


def _polish(f, fp, x, iterations=3):
    for _ in range(iterations):
        d = fp(x)
        if d == 0:
            break
        x = x - f(x) / d
    return x


@lru_cache(maxsize=None)
def airy_zero(k: int) -> AiryZero:
    """Locate the k-th zero of Ai by bracketing on sign changes."""
    if k < 1:
        raise ValueError("Airy zero index must be >= 1")
    # |a_k| ~ (3 pi (4k-1)/8)^(2/3); scan around it for a bracket
    guess = -(3.0 * math.pi * (4 * k - 1) / 8.0) ** (2.0 / 3.0)
    xs = np.linspace(guess - 0.6, guess + 0.6, 25)
    vals = airy_ai(xs)
    sc = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if sc.size != 1:
        raise BracketError(f"could not isolate Airy zero {k}")
    i = sc[0]
    x = find_root(lambda t: float(airy_ai(t)), xs[i], xs[i + 1], 1e-15)
    x = _polish(lambda t: float(airy_ai(t)), lambda t: float(airy_ai_prime(t)), x)
    return AiryZero(k, float(x))


def airy_first_zero() -> float:
    """First zero a_1 of Ai (about -2.33811)."""
    return airy_zero(1).location


@lru_cache(maxsize=None)
def airy_prime_first_zero() -> float:
    """First zero a_1' of Ai' (about -1.01879), the location of the Ai maximum."""
    ai2 = lambda t: float(t * airy_ai(t))  # Ai'' = x Ai
    x = find_root(lambda t: float(airy_ai_prime(t)), -1.5, -0.5, 1e-15)
    return float(_polish(lambda t: float(airy_ai_prime(t)), ai2, x))


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bracketed root of a continuous scalar function (Brent's method).

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` do not differ in sign.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo!r}, {fhi!r}")
    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quadrature:
    """Tolerances for :func:`integrate`."""

    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_depth: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def gauss_kronrod(f, lo: np.ndarray, hi: np.ndarray):
    """Apply the 15-point Kronrod rule on each panel ``[lo_i, hi_i]``.

    ``f`` must accept an array. Returns ``(integrals, error_estimates,
    max_abs_integrand)`` per panel; the error estimate is ``|K15 - G7|``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * GK_NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = half * (fx @ GK_WEIGHTS)
    g = half * (fx @ _G_WEIGHTS)
    return k, np.abs(k - g), np.max(np.abs(fx), axis=1)


_MAX_PANELS = 1 << 16


def _adaptive(f, a: float, b: float, q: Quadrature, abs_target=None):
    total_len = b - a
    active_lo = np.array([a])
    active_hi = np.array([b])
    done_val = 0.0
    done_err = 0.0
    peak = 0.0
    for _ in range(q.max_depth):
        k, err, fmax = gauss_kronrod(f, active_lo, active_hi)
        peak = max(peak, float(fmax.max()))
        estimate = done_val + k.sum()
        target = max(q.abs_tol, q.rel_tol * abs(estimate))
        if abs_target is not None:
            target = max(target, abs_target)
        if done_err + err.sum() <= target:
            return estimate, done_err + err.sum(), peak
        share = target * (active_hi - active_lo) / total_len
        ok = err <= share
        done_val += k[ok].sum()
        done_err += err[ok].sum()
        if ok.all():
            return done_val, done_err, peak
        lo, hi = active_lo[~ok], active_hi[~ok]
        if lo.size > _MAX_PANELS:
            break
        m = 0.5 * (lo + hi)
        active_lo = np.concatenate([lo, m])
        active_hi = np.concatenate([m, hi])
    raise AccuracyError("quadrature did not converge", float(done_val + k[~ok].sum()),
                        float(done_err + err[~ok].sum()))


def integrate(f: Callable, a: float, b: float, q: Quadrature | None = None, *,
              scale: float = 1.0) -> float:
    """Integrate a vectorised function over ``[a, b]``; ``b`` may be ``inf``.

    For ``b = inf`` panels of width ``scale * 1.5**k`` are marched outward
    and each is integrated adaptively; marching stops once the integrand
    has stayed below ``1e-16`` of its running peak on three consecutive
    panels.

    Raises
    ------
    AccuracyError
        When a panel cannot be resolved within ``q.max_depth`` bisections.
    """
    q = q or Quadrature()
    if not a < b:
        raise ValueError("integrate requires a < b")
    if np.isfinite(b):
        return float(_adaptive(f, a, b, q)[0])

    total = 0.0
    peak = 0.0
    quiet = 0
    lo = a
    width = scale
    for _ in range(400):
        hi = lo + width
        # panels far out only need accuracy relative to the running total
        val, _, pmax = _adaptive(f, lo, hi, q, abs_target=q.rel_tol * abs(total))
        total += val
        if pmax > peak:
            peak = pmax
        if peak > 0 and pmax < 1e-16 * peak:
            quiet += 1
            if quiet >= 3:
                return float(total)
        else:
            quiet = 0
        lo = hi
        width *= 1.5
    raise AccuracyError("semi-infinite integrand did not decay", total, float("nan"))
