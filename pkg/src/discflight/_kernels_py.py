"""Pure-Python/NumPy kernels; reference implementation and import fallback.

Signatures mirror ``_kernels.pyx`` exactly.
"""
import math

import numpy as np

_RESCALE = 1e150


def sturm_shoot(h, pot, lam):
    """Outward three-term recurrence for ``-U'' + pot U = lam U``, ``U_0 = 0``.

    ``pot`` holds the potential at every node including both ends. Returns
    ``(terminal, sign_changes)`` where ``terminal`` is the (rescaled) value
    at the last node and ``sign_changes`` counts sign flips along the
    sequence, i.e. the number of discrete eigenvalues below ``lam``.
    """
    n = pot.shape[0]
    h2 = h * h
    u_prev = 0.0
    u = 1.0
    changes = 0
    for i in range(1, n - 1):
        u_next = (2.0 + h2 * (pot[i] - lam)) * u - u_prev
        if (u_next < 0.0) != (u < 0.0) or u_next == 0.0:
            changes += 1
        u_prev, u = u, u_next
        if abs(u) > _RESCALE:
            u_prev /= _RESCALE
            u /= _RESCALE
    return u, changes


def inward_profile(h, pot, lam):
    """Inward recurrence from ``U_{n-1} = 0``; stable for the decaying tail."""
    n = pot.shape[0]
    h2 = h * h
    out = np.zeros(n)
    out[n - 2] = 1.0
    for i in range(n - 2, 0, -1):
        out[i - 1] = (2.0 + h2 * (pot[i] - lam)) * out[i] - out[i + 1]
        if abs(out[i - 1]) > _RESCALE:
            out[i - 1:] /= _RESCALE
    return out


def advance_paths(x, y, noise, dt, sigma, wall, table_lo, table_dx, table,
                  moment, step0, burn_in, split, hist_a, hist_b, hist_lo, hist_bw,
                  angle):
    """Euler-Maruyama update of many paths over ``noise.shape[1]`` steps.

    ``x, y`` (positions) and ``angle`` (accumulated post-burn-in winding)
    are updated in place; ``hist_a`` collects post-burn-in radii for global
    steps below ``split`` and ``hist_b`` the rest. Radial drift comes from
    linear interpolation in ``table``; the tangential drift is
    ``moment / rho``. With ``wall > 0`` radii below ``wall`` are reflected.
    """
    nsteps = noise.shape[1]
    nt = table.shape[0]
    nb = hist_a.shape[0]
    for k in range(nsteps):
        s = step0 + k
        rho = np.sqrt(x * x + y * y)
        pos = (rho - table_lo) / table_dx
        idx = np.clip(np.floor(pos), 0, nt - 2).astype(np.int64)
        frac = np.clip(pos - idx, 0.0, 1.0)
        vr = table[idx] + frac * (table[idx + 1] - table[idx])
        safe = rho > 0.0
        inv = np.where(safe, 1.0 / np.where(safe, rho, 1.0), 0.0)
        ex = x * inv
        ey = y * inv
        vphi = moment * inv
        vx = vr * ex - vphi * ey
        vy = vr * ey + vphi * ex
        xn = x + vx * dt + sigma * noise[:, k, 0]
        yn = y + vy * dt + sigma * noise[:, k, 1]
        if wall > 0.0:
            rn = np.sqrt(xn * xn + yn * yn)
            inside = rn < wall
            if inside.any():
                scale = (2.0 * wall - rn[inside]) / rn[inside]
                xn[inside] *= scale
                yn[inside] *= scale
        if s >= burn_in:
            angle += np.arctan2(x * yn - y * xn, x * xn + y * yn)
            rn = np.sqrt(xn * xn + yn * yn)
            b = np.clip(np.floor((rn - hist_lo) / hist_bw), 0, nb - 1).astype(np.int64)
            target = hist_a if s < split else hist_b
            np.add.at(target, b, 1)
        x[:] = xn
        y[:] = yn


def free_step(x, y, vx, vy, dt, sigma, n1, n2, wall):
    """Single-point update used by :func:`discflight.montecarlo.step`."""
    xn = x + vx * dt + sigma * n1
    yn = y + vy * dt + sigma * n2
    if wall > 0.0:
        rn = math.sqrt(xn * xn + yn * yn)
        if rn < wall:
            scale = (2.0 * wall - rn) / rn
            xn *= scale
            yn *= scale
    return xn, yn
