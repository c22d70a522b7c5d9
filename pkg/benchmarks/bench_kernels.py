"""Compiled versus pure-Python kernels on the Monte Carlo and shooting loops.

Usage: ``python benchmarks/bench_kernels.py [--paths N] [--steps K] [--repeat R]``.
Both backends receive identical inputs; the script also confirms that they
return bit-identical results.
"""
import argparse
import time

import numpy as np

from discflight import kernels
from discflight.asymptotic import leading_constant, limit_density
from discflight.bvp import default_grid
from discflight.model import PhysicalParams, drift_field
from discflight.montecarlo import SimConfig, _drift_table


def _mc_inputs(n_paths, n_steps):
    p = PhysicalParams(100.0, 1.0, 1.0)
    P = limit_density(p)
    cfg = SimConfig.for_density(p, P, n_paths=n_paths, n_steps=n_steps, burn_in=0)
    field = drift_field(P, p)
    rho, table = _drift_table(field, P.R, P.grid.R_max, cfg.drift_cap)
    rng = np.random.default_rng(0)
    r0 = P.quantile(rng.random(n_paths))
    noise = rng.standard_normal((n_paths, n_steps, 2))
    lo, hi = cfg.bin_range
    return dict(p=p, cfg=cfg, field=field, rho=rho, table=table, r0=r0, noise=noise,
                lo=lo, bw=(hi - lo) / cfg.histogram_bins)


def _run_mc(kern, d):
    cfg = d["cfg"]
    x = d["r0"].copy()
    y = np.zeros_like(x)
    ha = np.zeros(cfg.histogram_bins, dtype=np.int_)
    hb = np.zeros_like(ha)
    ang = np.zeros_like(x)
    t0 = time.perf_counter()
    kern.advance_paths(x, y, d["noise"], cfg.dt, np.sqrt(2 * cfg.dt), d["p"].R, d["rho"][0],
                       d["rho"][1] - d["rho"][0], d["table"], d["field"].angular_moment, 0, 0,
                       cfg.n_steps // 2, ha, hb, d["lo"], d["bw"], ang)
    return time.perf_counter() - t0, (x, y, ha, hb, ang)


def _run_shoot(kern, h, pot, lams):
    t0 = time.perf_counter()
    out = [kern.sturm_shoot(h, pot, lam) for lam in lams]
    return time.perf_counter() - t0, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=512)
    ap.add_argument("--steps", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    d = _mc_inputs(args.paths, args.steps)
    p = PhysicalParams(100.0, 1.0, 1.0)
    C = leading_constant(p)
    g = default_grid(p, C)
    h = g.spacing
    pot = np.ascontiguousarray(-(1 + (1 / (2 * np.pi * C * 100.0)) ** 2) / (4 * g.nodes ** 2))
    lams = -np.linspace(0.05, 0.3, 50)

    mc, sh = {}, {}
    for name in backends:
        kern = kernels.get_backend(name)
        mc[name] = min((_run_mc(kern, d) for _ in range(args.repeat)), key=lambda r: r[0])
        sh[name] = min((_run_shoot(kern, h, pot, lams) for _ in range(args.repeat)),
                       key=lambda r: r[0])

    n = args.paths * args.steps
    print(f"{'kernel':<16}{'backend':<10}{'best time [s]':>14}{'per unit [ns]':>16}")
    for name in backends:
        print(f"{'advance_paths':<16}{name:<10}{mc[name][0]:>14.4f}{1e9 * mc[name][0] / n:>16.1f}")
    for name in backends:
        per = 1e9 * sh[name][0] / (len(lams) * len(g))
        print(f"{'sturm_shoot':<16}{name:<10}{sh[name][0]:>14.4f}{per:>16.1f}")
    if len(backends) == 2:
        same = all(np.array_equal(a, b) for a, b in zip(mc["cython"][1], mc["python"][1]))
        same = same and sh["cython"][1] == sh["python"][1]
        print(f"speed-up advance_paths: {mc['python'][0] / mc['cython'][0]:.1f}x, "
              f"sturm_shoot: {sh['python'][0] / sh['cython'][0]:.1f}x, bit-identical: {same}")
    else:
        print("compiled backend not built; only the Python kernels were timed")


if __name__ == "__main__":
    main()
