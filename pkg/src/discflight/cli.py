"""
Command-line front end.

Every command reads an optional JSON config, applies flag overrides, writes
its outputs once at the end, and stamps each file with the resolved
config. Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotic import (appendix_report, asymptotic_constants, asymptotic_density,
                         first_order_rhs, first_order_rhs_by_quadrature, leading_constant,
                         limit_density, self_consistent_constant)
from .bvp import (compare_with_asymptotic, default_grid, residual_of, self_consistent_solve,
                  shoot_ground_state)
from .errors import (AccuracyError, BracketError, ConfigError, DensityError, DiscflightError,
                     NoBoundStateError, NonConvergenceError, RegimeError)
from .model import (PhysicalParams, drift_field, mean_angular_velocity, strip_width,
                    winding_constant)
from .montecarlo import SimConfig, compare_distribution, half_ks, histogram_iqr, simulate
from .numerics import (Quadrature, airy_ai, airy_ai_prime, airy_first_zero, fault_injection,
                       integrate)
from .variational import action_of_density, action_of_velocity, verify_minimality

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

DEFAULTS = {
    "R": 100.0,
    "V": 1.0,
    "D": 1.0,
    "out": ".",
    "format": "csv",
    "seed": 0,
    "grid": {"n": 2048},
    "asymptotic": {"constant": "leading"},
    "solver": {"tol": 1e-10, "max_iter": 200, "damping": 0.5, "sweep_R": None},
    "simulation": {
        "source": "limit",
        "dt": 1e-3,
        "n_paths": 10_000,
        "n_steps": 20_100,
        "burn_in": 20_000,
        "histogram_bins": 400,
        "drift_cap": None,
        "ks_threshold": 0.02,
    },
    "verify": {"n_perturbations": 50},
}

_CHOICES = {
    ("format",): ("csv", "json"),
    ("asymptotic", "constant"): ("leading", "self-consistent"),
    ("simulation", "source"): ("limit", "asymptotic", "solved"),
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _merge(base: dict, update: dict, path: tuple = ()) -> None:
    for key, value in update.items():
        where = ".".join(path + (key,))
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            _merge(base[key], value, path + (key,))
        else:
            base[key] = value


def _check(cfg: dict) -> None:
    for path, allowed in _CHOICES.items():
        node = cfg
        for p in path:
            node = node[p]
        if node not in allowed:
            raise ConfigError(f"{'.'.join(path)} must be one of {allowed}, got {node!r}")
    for key in ("R", "V", "D"):
        if not isinstance(cfg[key], (int, float)) or isinstance(cfg[key], bool):
            raise ConfigError(f"{key} must be a number")
    seed = cfg["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an integer in [0, 2^64)")
    n = cfg["grid"]["n"]
    if not isinstance(n, int) or n < 16:
        raise ConfigError("grid.n must be an integer >= 16")
    sweep = cfg["solver"]["sweep_R"]
    if sweep is not None and (not isinstance(sweep, list) or not sweep):
        raise ConfigError("solver.sweep_R must be a non-empty list of radii")
    sim = cfg["simulation"]
    for key in ("n_paths", "n_steps", "burn_in", "histogram_bins"):
        if not isinstance(sim[key], int) or isinstance(sim[key], bool):
            raise ConfigError(f"simulation.{key} must be an integer")
    if not isinstance(cfg["verify"]["n_perturbations"], int):
        raise ConfigError("verify.n_perturbations must be an integer")


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = copy.deepcopy(DEFAULTS)
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        _merge(cfg, loaded)
    flags = {
        ("R",): "R", ("V",): "V", ("D",): "D", ("out",): "out", ("format",): "format",
        ("seed",): "seed", ("grid", "n"): "grid_n",
        ("asymptotic", "constant"): "constant",
        ("solver", "tol"): "tol", ("solver", "sweep_R"): "sweep_R",
        ("simulation", "source"): "source", ("simulation", "dt"): "dt",
        ("simulation", "n_paths"): "n_paths", ("simulation", "n_steps"): "n_steps",
        ("simulation", "burn_in"): "burn_in", ("simulation", "histogram_bins"): "bins",
        ("verify", "n_perturbations"): "n_perturbations",
    }
    for path, attr in flags.items():
        value = getattr(args, attr, None)
        if value is None:
            continue
        node = cfg
        for p in path[:-1]:
            node = node[p]
        node[path[-1]] = value
    _check(cfg)
    return cfg


def _params(cfg: dict, R: float | None = None) -> PhysicalParams:
    try:
        return PhysicalParams(float(cfg["R"] if R is None else R), float(cfg["V"]), float(cfg["D"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _stamp(cfg: dict) -> dict:
    # the output location is not an input; leaving it out keeps reruns byte-identical
    return {k: v for k, v in cfg.items() if k != "out"}


def _header(command: str, cfg: dict) -> list[str]:
    return [f"discflight {__version__} {command}",
            "config " + json.dumps(_stamp(cfg), sort_keys=True)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


class _Writer:
    """Collects outputs and writes them in one pass after computation."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        self.files: dict[str, str] = {}

    def json(self, name: str, payload: dict) -> None:
        doc = {"command": self.command, "version": __version__, "config": _stamp(self.cfg)}
        doc.update(_jsonable(payload))
        self.files[name] = json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def text(self, name: str, body: str) -> None:
        self.files[name] = body

    def density(self, stem: str, P) -> None:
        if self.cfg["format"] == "csv":
            self.text(f"{stem}.csv", P.to_csv(_header(self.command, self.cfg)))
        else:
            self.json(f"{stem}.json", {"density": json.loads(P.to_json())})

    def table(self, stem: str, rows: list[dict]) -> None:
        if self.cfg["format"] == "json":
            self.json(f"{stem}.json", {"rows": rows})
            return
        cols = list(rows[0])
        lines = [f"# {h}" for h in _header(self.command, self.cfg)]
        lines.append(",".join(cols))
        for row in rows:
            lines.append(",".join(_fmt(row[c]) for c in cols))
        self.text(f"{stem}.csv", "\n".join(lines) + "\n")

    def flush(self) -> list[Path]:
        out = Path(self.cfg["out"])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from exc
        written = []
        for name, body in self.files.items():
            path = out / name
            try:
                path.write_text(body)
            except OSError as exc:
                raise ConfigError(f"cannot write {path}: {exc.strerror}") from exc
            written.append(path)
        return written


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_asymptotic(cfg: dict) -> list[Path]:
    """Airy density, its constants and the first-order constant report."""
    params = _params(cfg)
    w = _Writer("asymptotic", cfg)
    c0 = leading_constant(params)
    report = appendix_report(params)
    root = report["self_consistent_constant"]
    C = c0 if cfg["asymptotic"]["constant"] == "leading" else root
    P = asymptotic_density(params, C, n=cfg["grid"]["n"])
    consts = json.loads(asymptotic_constants(params, C).to_json())
    w.density("P", P)
    w.json("constants.json", {
        "constants": consts,
        "constant_choice": cfg["asymptotic"]["constant"],
        "leading_constant": c0,
        "self_consistent_constant": root,
    })
    w.json("appendix.json", {"appendix": report})
    return w.flush()


def _solve_one(cfg: dict, R: float | None = None):
    params = _params(cfg, R)
    grid = default_grid(params, n=cfg["grid"]["n"])
    s = cfg["solver"]
    return self_consistent_solve(params, tol=s["tol"], max_iter=s["max_iter"],
                                 damping=s["damping"], grid=grid)


def cmd_solve(cfg: dict) -> list[Path]:
    """Self-consistent ground state, alone or over a sweep of radii."""
    w = _Writer("solve", cfg)
    sweep = cfg["solver"]["sweep_R"]
    radii = [cfg["R"]] if sweep is None else sweep
    sols = [_solve_one(cfg, R) for R in radii]
    rows = [compare_with_asymptotic(s) for s in sols]
    if sweep is None:
        w.json("solution.json", {"solution": sols[0].to_dict()})
        w.density("P", sols[0].P)
    else:
        w.json("solution.json", {"solutions": [s.to_dict() for s in sols]})
        for R, s in zip(radii, sols):
            w.density(f"P_R{float(R):g}", s.P)
    w.table("comparison", rows)
    return w.flush()


def _source_density(cfg: dict, params: PhysicalParams):
    source = cfg["simulation"]["source"]
    n = cfg["grid"]["n"]
    if source == "limit":
        return limit_density(params, n=n)
    if source == "asymptotic":
        return asymptotic_density(params, n=n)
    return _solve_one(cfg).P


def cmd_simulate(cfg: dict) -> list[Path]:
    """Langevin run under the drift of the chosen density, compared against it."""
    params = _params(cfg)
    sim = cfg["simulation"]
    P = _source_density(cfg, params)
    try:
        config = SimConfig.for_density(params, P, dt=sim["dt"], n_paths=sim["n_paths"],
                                       n_steps=sim["n_steps"], burn_in=sim["burn_in"],
                                       seed=cfg["seed"], histogram_bins=sim["histogram_bins"],
                                       drift_cap=sim["drift_cap"])
    except TypeError as exc:
        raise ConfigError(f"invalid simulation settings: {exc}") from exc
    stats = simulate(params, P, config)
    report = compare_distribution(stats, P, threshold=sim["ks_threshold"])
    w = _Writer("simulate", cfg)
    w.text("histogram.csv", stats.to_csv(_header("simulate", cfg)))
    target = params.angular_velocity
    summary = stats.summary()
    summary.update({
        "expected_winding_rate": target,
        "winding_rate_z": (stats.mean_winding_rate - target) / stats.winding_rate_stderr,
        "turn_rate": stats.mean_winding_rate / (2.0 * math.pi),
        "expected_turn_rate": params.turn_rate,
        "half_ks": half_ks(stats),
        "interquartile_width": histogram_iqr(stats),
        "target_interquartile_width": P.interquartile_width(),
        "drift_cap": config.drift_cap,
        "total_angle": stats.total_angle,
    })
    w.json("stats.json", {"stats": summary})
    w.json("comparison.json", {"comparison": report.to_dict()})
    return w.flush()


def cmd_action(cfg: dict) -> list[Path]:
    """Action of the solved and the Airy densities, by both formulas."""
    params = _params(cfg)
    sol = _solve_one(cfg)
    rows = []
    for name, P, gamma in (("solved", sol.P, sol.eigen.gamma),
                           ("asymptotic", asymptotic_density(params, n=cfg["grid"]["n"]), None)):
        br = action_of_density(P, params, gamma)
        row = {"density": name}
        row.update(br.to_dict())
        row["action"] = br.radial_term + br.angular_term
        row["velocity_form"] = action_of_velocity(P, drift_field(P, params))
        rows.append(row)
    w = _Writer("action", cfg)
    w.json("action.json", {"actions": rows})
    return w.flush()


def _check_entry(name: str, value: float, tolerance: float, passed: bool) -> dict:
    return {"name": name, "value": float(value), "tolerance": float(tolerance),
            "passed": bool(passed)}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def run_checks(params: PhysicalParams, n_perturbations: int = 50, seed: int = 0,
               grid_n: int = 2048) -> dict:
    """The property suite behind ``verify``; returns checks and informational fields."""
    checks = []
    a1 = airy_first_zero()
    checks.append(_check_entry("airy_first_zero", a1 + 2.33811, 1e-5, abs(a1 + 2.33811) <= 1e-5))
    checks.append(_check_entry("airy_zero_residual", airy_ai(a1), 1e-12, abs(airy_ai(a1)) < 1e-12))
    ai0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
    checks.append(_check_entry("airy_ai_at_zero", airy_ai(0.0) - ai0, 1e-12,
                               abs(airy_ai(0.0) - ai0) <= 1e-12))
    aip0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
    checks.append(_check_entry("airy_ai_prime_at_zero", airy_ai_prime(0.0) - aip0, 1e-10,
                               abs(airy_ai_prime(0.0) - aip0) <= 1e-10))
    q = Quadrature(abs_tol=1e-300, rel_tol=1e-13)
    d2 = airy_ai_prime(a1) ** 2
    i0 = integrate(lambda x: airy_ai(x + a1) ** 2, 0.0, np.inf, q)
    i1 = integrate(lambda x: x * airy_ai(x + a1) ** 2, 0.0, np.inf, q)
    checks.append(_check_entry("airy_square_integral", _rel(i0, d2), 1e-10, _rel(i0, d2) <= 1e-10))
    m1 = 2.0 / 3.0 * abs(a1) * d2
    checks.append(_check_entry("airy_first_moment", _rel(i1, m1), 1e-10, _rel(i1, m1) <= 1e-10))

    Pl = limit_density(params)
    dm = abs(Pl.mass() - 1.0)
    tol_m = 5.0 * params.R ** (-2.0 / 3.0)
    checks.append(_check_entry("limit_density_normalisation", dm, tol_m, dm <= tol_m))

    sol = self_consistent_solve(params, tol=1e-10, grid=default_grid(params, n=grid_n))
    P = sol.P
    closure = _rel(winding_constant(P), sol.C)
    checks.append(_check_entry("winding_constant_closure", closure, 1e-8, closure <= 1e-8))
    checks.append(_check_entry("ground_state_nodes", sol.eigen.node_count, 0,
                               sol.eigen.node_count == 0 and sol.eigen.excited_node_count == 1))
    g_shoot = shoot_ground_state(params, sol.C, sol.eigen.grid)
    dg = _rel(g_shoot, sol.eigen.gamma)
    checks.append(_check_entry("shooting_agrees_with_matrix", dg, 1e-8, dg <= 1e-8))
    field = drift_field(P, params)
    res = residual_of(P, field, params)
    h2 = (res["h"] / strip_width(params)) ** 2
    checks.append(_check_entry("stationary_residual", res["residual"], h2, res["residual"] <= h2))
    checks.append(_check_entry("zero_flux", res["flux"], 1e-10, res["flux"] <= 1e-10))
    omega = mean_angular_velocity(P, field.v_phi)
    dw = _rel(omega, params.angular_velocity)
    checks.append(_check_entry("mean_angular_velocity", dw, 1e-8, dw <= 1e-8))
    av = action_of_velocity(P, field)
    ad = action_of_density(P, params).total
    checks.append(_check_entry("action_forms_agree", _rel(av, ad), 1e-8, _rel(av, ad) <= 1e-8))
    mini = verify_minimality(P, params, n_perturbations=n_perturbations, seed=seed)
    checks.append(_check_entry("minimality_failures", len(mini.failures), 0, mini.passed))
    checks.append(_check_entry("minimality_stationarity", mini.max_stationarity_ratio, 1e-4,
                               mini.max_stationarity_ratio <= 1e-4))

    root = self_consistent_constant(params)
    rhs_q = first_order_rhs_by_quadrature(params, root)
    rhs_c = first_order_rhs(params, root)
    checks.append(_check_entry("first_order_rhs_by_quadrature", _rel(rhs_q, rhs_c), 1e-8,
                               _rel(rhs_q, rhs_c) <= 1e-8))

    appendix = appendix_report(params)
    informational = {
        "appendix": appendix,
        "bvp_constant_vs_root": (sol.C - root) / root,
        "bvp_gamma": sol.eigen.gamma,
        "angular_velocity_rad": params.angular_velocity,
        "turn_rate": params.turn_rate,
        "minimality_min_curvature": min(mini.curvatures),
    }
    return {"checks": checks, "passed": all(c["passed"] for c in checks),
            "informational": informational}


def cmd_verify(cfg: dict, fault_scale: float | None = None) -> tuple[list[Path], bool]:
    """Run the property suite and write ``verify.json``; returns (paths, passed)."""
    params = _params(cfg)
    kw = dict(n_perturbations=cfg["verify"]["n_perturbations"], seed=cfg["seed"],
              grid_n=cfg["grid"]["n"])
    if fault_scale is not None:
        with fault_injection(fault_scale):
            result = _guarded_checks(params, kw)
    else:
        result = _guarded_checks(params, kw)
    result["fault_scale"] = fault_scale
    w = _Writer("verify", cfg)
    w.json("verify.json", result)
    return w.flush(), result["passed"]


def _guarded_checks(params, kw) -> dict:
    # a numerical breakdown inside the suite is a failed check, not a crash
    try:
        return run_checks(params, **kw)
    except (DiscflightError, ArithmeticError) as exc:
        return {"checks": [{"name": "suite_completed", "passed": False,
                            "error": f"{type(exc).__name__}: {exc}"}],
                "passed": False, "informational": {}}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _radii(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty radius list")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--R", type=float, help="disc radius")
    common.add_argument("--V", type=float, help="tangential speed")
    common.add_argument("--D", type=float, help="diffusion coefficient")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--format", choices=["csv", "json"], help="density/table format")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--grid-n", dest="grid_n", type=int, help="radial grid nodes")

    parser = _Parser(prog="discflight",
                     description="Stationary radial law of a Brownian particle winding around a disc.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("asymptotic", parents=[common], help="Airy-squared density and constants")
    p.add_argument("--constant", choices=["leading", "self-consistent"],
                   help="winding constant used for the density")

    p = sub.add_parser("solve", parents=[common], help="self-consistent boundary-value solution")
    p.add_argument("--tol", type=float, help="relative tolerance on the winding constant")
    p.add_argument("--sweep-R", dest="sweep_R", type=_radii, help="comma-separated radii")

    p = sub.add_parser("simulate", parents=[common], help="Langevin simulation")
    p.add_argument("--source", choices=["limit", "asymptotic", "solved"],
                   help="density that defines the drift")
    p.add_argument("--dt", type=float)
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--n-steps", dest="n_steps", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--bins", type=int, help="histogram bins")

    sub.add_parser("action", parents=[common], help="action of solved and Airy densities")

    p = sub.add_parser("verify", parents=[common], help="run the property suite")
    p.add_argument("--n-perturbations", dest="n_perturbations", type=int)
    p.add_argument("--inject-fault", dest="inject_fault", type=float, nargs="?",
                   const=1.01, default=None, help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "asymptotic":
            paths = cmd_asymptotic(cfg)
        elif args.command == "solve":
            paths = cmd_solve(cfg)
        elif args.command == "simulate":
            paths = cmd_simulate(cfg)
        elif args.command == "action":
            paths = cmd_action(cfg)
        else:
            paths, ok = cmd_verify(cfg, args.inject_fault)
            for path in paths:
                print(path)
            if not ok:
                print("verification failed", file=sys.stderr)
                return EXIT_VERIFY
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoBoundStateError, NonConvergenceError, AccuracyError, RegimeError,
            BracketError, DensityError) as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
