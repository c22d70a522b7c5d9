"""
Langevin simulation of the tilted planar Brownian motion outside the disc.

Paths are advanced in Cartesian coordinates with Euler-Maruyama; the drift
is assembled from the polar components of the minimal-action field of a
target density. Near the wall ``v_rho ~ 2 D / (rho - R)`` is capped and
excursions into the disc are reflected radially.

Every path owns a Philox (counter-based) stream derived from
``SeedSequence(seed, spawn_key=(path,))``: first the initial radius
(inverse CDF) and angle, then the noise, consumed in order. Results are
therefore independent of how paths are blocked or which kernel backend
runs them.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, DensityError
from .model import DriftField, PhysicalParams, RadialDensity, drift_field, strip_width

__all__ = [
    "ComparisonReport",
    "SimConfig",
    "SimulationStats",
    "compare_distribution",
    "half_ks",
    "histogram_iqr",
    "histogram_quantiles",
    "localization_exponent",
    "path_generator",
    "simulate",
    "step",
]


@dataclass(frozen=True)
class SimConfig:
    dt: float
    n_steps: int
    n_paths: int
    burn_in: int
    seed: int
    drift_cap: float
    histogram_bins: int
    bin_range: tuple

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.n_paths < 1 or self.n_steps < 1:
            raise ConfigError("n_paths and n_steps must be positive")
        if not 0 <= self.burn_in < self.n_steps:
            raise ConfigError("burn_in must lie in [0, n_steps)")
        if not self.drift_cap > 0:
            raise ConfigError("drift_cap must be positive")
        if self.histogram_bins < 1:
            raise ConfigError("need at least one histogram bin")
        lo, hi = self.bin_range
        if not hi > lo:
            raise ConfigError("empty bin range")
        if self.drift_cap * self.dt >= self.bin_width:
            raise ConfigError("drift_cap * dt must stay below the bin width")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def bin_width(self) -> float:
        lo, hi = self.bin_range
        return (hi - lo) / self.histogram_bins

    @property
    def n_effective(self) -> int:
        """Recorded samples per path."""
        return self.n_steps - self.burn_in

    @classmethod
    def for_density(cls, params: PhysicalParams, P: RadialDensity, *, dt: float = 1e-3,
                    n_paths: int = 10_000, n_steps: int = 20_100, burn_in: int = 20_000,
                    seed: int = 0, histogram_bins: int = 400,
                    drift_cap: float | None = None) -> "SimConfig":
        """Defaults: cap ``10 D / strip_width`` and bins spanning the density grid."""
        cap = 10.0 * params.D / strip_width(params) if drift_cap is None else drift_cap
        return cls(dt, n_steps, n_paths, burn_in, seed, cap, histogram_bins,
                   (P.R, P.grid.R_max))


@dataclass
class SimulationStats:
    radial_histogram: np.ndarray
    bin_edges: np.ndarray
    total_angle: float
    elapsed_time: float
    n_paths: int
    dt: float
    mean_winding_rate: float
    winding_rate_stderr: float
    first_half: np.ndarray = field(repr=False, default=None)
    second_half: np.ndarray = field(repr=False, default=None)
    ks_distance: float | None = None

    @property
    def n_effective(self) -> int:
        return int(self.radial_histogram.sum())

    def to_csv(self, header_lines: list[str] | None = None) -> str:
        lines = [f"# {h}" for h in header_lines or []]
        lines.append("bin_lo,bin_hi,count")
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.radial_histogram):
            lines.append(f"{lo:.17g},{hi:.17g},{int(c)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "ks": self.ks_distance,
            "winding_rate": self.mean_winding_rate,
            "winding_rate_stderr": self.winding_rate_stderr,
            "n_effective": self.n_effective,
            "dt": self.dt,
            "n_paths": self.n_paths,
            "elapsed_time": self.elapsed_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary())


def step(position, field: DriftField, params: PhysicalParams, dt: float, noise, *,
         drift_cap: float = math.inf, wall_radius: float | None = None):
    """One Euler-Maruyama update of a single point.

    ``x' = x + v(x) dt + sqrt(2 D dt) noise`` with ``v`` built from the
    polar components at the current radius (``v_rho`` clipped to
    ``+-drift_cap``). A step that lands inside the disc is reflected to
    radius ``2 R - rho'`` at the same angle; ``wall_radius=0`` removes the
    disc (free-space test mode).
    """
    x, y = float(position[0]), float(position[1])
    wall = params.R if wall_radius is None else wall_radius
    rho = math.hypot(x, y)
    vx = vy = 0.0
    if rho > 0:
        vr = float(np.clip(field.v_rho(rho), -drift_cap, drift_cap))
        vp = float(field.v_phi(rho))
        ex, ey = x / rho, y / rho
        vx = vr * ex - vp * ey
        vy = vr * ey + vp * ex
    sigma = math.sqrt(2.0 * params.D * dt)
    return kernels.free_step(x, y, vx, vy, dt, sigma, float(noise[0]), float(noise[1]), wall)


def path_generator(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(path,))))


def _drift_table(field: DriftField, lo: float, hi: float, cap: float, n: int = 16384):
    rho = np.linspace(lo, hi, n)
    with np.errstate(invalid="ignore"):
        v = np.asarray(field.v_rho(rho), dtype=float)
    v = np.where(np.isfinite(v), v, np.sign(np.nan_to_num(v, nan=1.0)) * cap)
    return rho, np.clip(v, -cap, cap)


def simulate(params: PhysicalParams, P_target: RadialDensity, config: SimConfig, *,
             backend: str | None = None, block: int = 512, chunk: int = 2048) -> SimulationStats:
    """Run ``config.n_paths`` paths started from ``P_target`` under its drift field.

    Raises
    ------
    ConfigError
        When ``drift_cap * dt`` reaches a tenth of the strip width.
    """
    w = strip_width(params)
    if config.drift_cap * config.dt >= w / 10.0:
        raise ConfigError("time step too large for the drift cap: drift_cap*dt >= strip/10")
    P_target.validate(norm_tol=None)
    field = drift_field(P_target, params)
    kern = kernels.get_backend(backend)

    t_rho, table = _drift_table(field, P_target.R, P_target.grid.R_max, config.drift_cap)
    t_dx = t_rho[1] - t_rho[0]
    fine, cdf = P_target.radial_cdf()
    sigma = math.sqrt(2.0 * params.D * config.dt)
    nb = config.histogram_bins
    lo, hi = config.bin_range
    bw = (hi - lo) / nb
    hist_a = np.zeros(nb, dtype=np.int_)
    hist_b = np.zeros(nb, dtype=np.int_)
    split = config.burn_in + config.n_effective // 2
    angles = np.zeros(config.n_paths)

    for start in range(0, config.n_paths, block):
        ids = range(start, min(start + block, config.n_paths))
        gens = [path_generator(config.seed, p) for p in ids]
        u = np.array([g.random(2) for g in gens])
        r0 = np.interp(u[:, 0], cdf, fine)
        r0 = np.maximum(r0, P_target.R)
        phi0 = 2.0 * math.pi * u[:, 1]
        x = r0 * np.cos(phi0)
        y = r0 * np.sin(phi0)
        ang = np.zeros(len(gens))
        for s0 in range(0, config.n_steps, chunk):
            m = min(chunk, config.n_steps - s0)
            noise = np.stack([g.standard_normal((m, 2)) for g in gens])
            kern.advance_paths(x, y, noise, config.dt, sigma, params.R, t_rho[0], t_dx, table,
                               field.angular_moment, s0, config.burn_in, split, hist_a, hist_b,
                               lo, bw, ang)
        angles[start:start + len(gens)] = ang

    elapsed = config.n_effective * config.dt
    rates = angles / elapsed
    total = float(angles.sum())
    stderr = float(rates.std(ddof=1) / math.sqrt(config.n_paths)) if config.n_paths > 1 else math.nan
    return SimulationStats(
        radial_histogram=hist_a + hist_b,
        bin_edges=np.linspace(lo, hi, nb + 1),
        total_angle=total,
        elapsed_time=elapsed,
        n_paths=config.n_paths,
        dt=config.dt,
        mean_winding_rate=total / (config.n_paths * elapsed),
        winding_rate_stderr=stderr,
        first_half=hist_a,
        second_half=hist_b,
    )


@dataclass
class ComparisonReport:
    ks: float
    chi2: float
    dof: int
    threshold: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.ks <= self.threshold

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _hist_ks(counts_a, counts_b_cdf):
    ecdf = np.concatenate([[0.0], np.cumsum(counts_a)]) / counts_a.sum()
    return float(np.max(np.abs(ecdf - counts_b_cdf)))


def compare_distribution(stats: SimulationStats, P: RadialDensity,
                         threshold: float = 0.02) -> ComparisonReport:
    """KS distance (at bin edges) and chi-square of the histogram against ``P``.

    The target CDF is the radial law ``2 pi rho P`` normalised on the
    density grid. Sets ``stats.ks_distance``.

    Raises
    ------
    ValueError
        For an empty histogram.
    """
    counts = np.asarray(stats.radial_histogram, dtype=float)
    n = counts.sum()
    if n <= 0:
        raise ValueError("empty histogram")
    target = P.radial_cdf(stats.bin_edges)
    ks = _hist_ks(counts, target)
    expected = n * np.diff(target)
    ok = expected > 5.0
    chi2 = float(np.sum((counts[ok] - expected[ok]) ** 2 / expected[ok]))
    stats.ks_distance = ks
    return ComparisonReport(ks, chi2, int(ok.sum()) - 1, threshold, int(n))


def half_ks(stats: SimulationStats) -> float:
    """KS distance between the first- and second-half post-burn-in histograms."""
    a = np.asarray(stats.first_half, dtype=float)
    b = np.asarray(stats.second_half, dtype=float)
    cb = np.concatenate([[0.0], np.cumsum(b)]) / b.sum()
    return _hist_ks(a, cb)


def histogram_quantiles(stats: SimulationStats, probs) -> np.ndarray:
    counts = np.asarray(stats.radial_histogram, dtype=float)
    cdf = np.concatenate([[0.0], np.cumsum(counts)]) / counts.sum()
    return np.interp(probs, cdf, stats.bin_edges)


def histogram_iqr(stats: SimulationStats) -> float:
    q1, q3 = histogram_quantiles(stats, [0.25, 0.75])
    return float(q3 - q1)


def localization_exponent(radii, V: float, D: float, density_factory, **config_kw) -> dict:
    """Fit the log-log slope of the simulated interquartile width over ``radii``.

    ``density_factory(params)`` supplies the target density (and thereby
    the drift) for each radius.
    """
    radii = np.asarray(radii, dtype=float)
    widths = []
    for R in radii:
        p = PhysicalParams(float(R), V, D)
        P = density_factory(p)
        cfg = SimConfig.for_density(p, P, **config_kw)
        widths.append(histogram_iqr(simulate(p, P, cfg)))
    slope, _ = np.polyfit(np.log(radii), np.log(widths), 1)
    return {"radii": radii.tolist(), "widths": widths, "slope": float(slope)}
