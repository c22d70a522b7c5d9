# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures and semantics as ``_kernels_py``."""
from libc.math cimport atan2, floor, sqrt, fabs

import numpy as np

cdef double _RESCALE = 1e150


def sturm_shoot(double h, const double[::1] pot, double lam):
    cdef Py_ssize_t n = pot.shape[0], i
    cdef double h2 = h * h, u_prev = 0.0, u = 1.0, u_next
    cdef long changes = 0
    for i in range(1, n - 1):
        u_next = (2.0 + h2 * (pot[i] - lam)) * u - u_prev
        if ((u_next < 0.0) != (u < 0.0)) or u_next == 0.0:
            changes += 1
        u_prev = u
        u = u_next
        if fabs(u) > _RESCALE:
            u_prev /= _RESCALE
            u /= _RESCALE
    return u, changes


def inward_profile(double h, const double[::1] pot, double lam):
    cdef Py_ssize_t n = pot.shape[0], i, j
    cdef double h2 = h * h
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    out[n - 2] = 1.0
    for i in range(n - 2, 0, -1):
        out[i - 1] = (2.0 + h2 * (pot[i] - lam)) * out[i] - out[i + 1]
        if fabs(out[i - 1]) > _RESCALE:
            for j in range(i - 1, n):
                out[j] /= _RESCALE
    return out_arr


def advance_paths(double[::1] x, double[::1] y, const double[:, :, ::1] noise,
                  double dt, double sigma, double wall,
                  double table_lo, double table_dx, const double[::1] table,
                  double moment, long step0, long burn_in, long split,
                  long[::1] hist_a, long[::1] hist_b, double hist_lo, double hist_bw,
                  double[::1] angle):
    cdef Py_ssize_t npaths = x.shape[0], nsteps = noise.shape[1]
    cdef Py_ssize_t nt = table.shape[0], nb = hist_a.shape[0]
    cdef Py_ssize_t p, k, idx, b
    cdef long s
    cdef double xp, yp, rho, pos, frac, vr, inv, ex, ey, vphi, vx, vy
    cdef double xn, yn, rn, scale
    for p in range(npaths):
        xp = x[p]
        yp = y[p]
        for k in range(nsteps):
            s = step0 + k
            rho = sqrt(xp * xp + yp * yp)
            pos = (rho - table_lo) / table_dx
            if pos < 0.0:
                pos = 0.0
            idx = <Py_ssize_t> floor(pos)
            if idx > nt - 2:
                idx = nt - 2
            frac = pos - idx
            if frac > 1.0:
                frac = 1.0
            vr = table[idx] + frac * (table[idx + 1] - table[idx])
            if rho > 0.0:
                inv = 1.0 / rho
            else:
                inv = 0.0
            ex = xp * inv
            ey = yp * inv
            vphi = moment * inv
            vx = vr * ex - vphi * ey
            vy = vr * ey + vphi * ex
            xn = xp + vx * dt + sigma * noise[p, k, 0]
            yn = yp + vy * dt + sigma * noise[p, k, 1]
            if wall > 0.0:
                rn = sqrt(xn * xn + yn * yn)
                if rn < wall:
                    scale = (2.0 * wall - rn) / rn
                    xn *= scale
                    yn *= scale
            if s >= burn_in:
                angle[p] += atan2(xp * yn - yp * xn, xp * xn + yp * yn)
                rn = sqrt(xn * xn + yn * yn)
                pos = floor((rn - hist_lo) / hist_bw)
                if pos < 0.0:
                    b = 0
                elif pos > nb - 1:
                    b = nb - 1
                else:
                    b = <Py_ssize_t> pos
                if s < split:
                    hist_a[b] += 1
                else:
                    hist_b[b] += 1
            xp = xn
            yp = yn
        x[p] = xp
        y[p] = yp


def free_step(double x, double y, double vx, double vy, double dt, double sigma,
              double n1, double n2, double wall):
    cdef double xn = x + vx * dt + sigma * n1
    cdef double yn = y + vy * dt + sigma * n2
    cdef double rn, scale
    if wall > 0.0:
        rn = sqrt(xn * xn + yn * yn)
        if rn < wall:
            scale = (2.0 * wall - rn) / rn
            xn *= scale
            yn *= scale
    return xn, yn
