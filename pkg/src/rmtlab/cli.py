"""Command line front end (``rmtlab``).

Exit codes: 0 on success, 2 for configuration or output errors, 3 when a
``verify`` suite reports a failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import io as rio
from .config import ConfigError, ExperimentConfig, config_from_flat, config_to_text, load_config, parse_config_text

TAIL_COMMANDS = {
    "gap-tail": "gap-tail",
    "sv-tail": "sv-tail",
    "rect-sv": "rect-sv",
    "deloc": "deloc",
    "distance": "distance",
}

# flag name -> dotted config key
_FLAG_KEYS = {
    "n": "n", "k": "k", "i": "i", "N": "N", "eps_loc": "eps_loc", "gamma": "gamma",
    "trials": "trials", "seed": "seed", "chunk": "chunk",
    "dist": "ensemble.dist", "pattern": "ensemble.pattern", "scales": "ensemble.scales",
    "a_dist": "vector.dist", "per_matrix": "vector.per_matrix",
    "grid_lo": "grid.lo", "grid_hi": "grid.hi", "grid_ratio": "grid.ratio", "eps": "grid.points",
    "csv": "output.csv", "json": "output.json", "svg": "output.svg",
}


class CliError(Exception):
    pass


def _add_tail_flags(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--i", type=int, help="1-based eigenvalue index (gap-tail)")
    p.add_argument("--N", type=int, help="row count (rect-sv)")
    p.add_argument("--eps-loc", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--dist", help="entry law, e.g. gaussian or sparse:rademacher:0.3; zones separated by |")
    p.add_argument("--pattern", help="homogeneous, checkerboard, banded or random")
    p.add_argument("--scales", help="comma separated per-zone scales")
    p.add_argument("--a-dist", help="law of the vector a (distance)")
    p.add_argument("--per-matrix", type=int, help="draws of a per matrix (distance)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-lo", type=float)
    p.add_argument("--grid-hi", type=float)
    p.add_argument("--grid-ratio", type=float)
    p.add_argument("--eps", help="explicit comma separated eps grid")
    p.add_argument("--chunk", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output prefix: writes PREFIX.csv and PREFIX.json")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.add_argument("--svg")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmtlab", description="Monte Carlo experiments for random symmetric matrices.")
    sub = ap.add_subparsers(dest="cmd", required=True, metavar="COMMAND")
    for name in TAIL_COMMANDS:
        p = sub.add_parser(name, help=f"{name} tail experiment")
        _add_tail_flags(p)
        if name == "gap-tail":
            p.add_argument("--min-gap", action="store_true", help="min over i of λ_{i+k-1} − λ_i")

    p = sub.add_parser("rlogd", help="log-RLCD bracket of a vector or matrix read from CSV")
    p.add_argument("--vector", required=True, help="CSV file (a vector, or matrix rows)")
    p.add_argument("--mode", choices=("vector", "matrix", "subspace", "rd"), default="vector")
    p.add_argument("--dist", default="rademacher")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--theta-max", type=float, default=1e3)
    p.add_argument("--ratio", type=float, default=1.001)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("threshold", help="threshold function g_L(v, k) against the zeroed-out matrix")
    p.add_argument("--vector", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=float, default=0.25)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--dist", default="rademacher")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", required=True, help="suite name or 'all'")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="re-render a JSON summary")
    p.add_argument("--json", required=True, dest="summary")
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.add_argument("--config-out", help="write the echoed config as a config file")
    return ap


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _check_writable(paths):
    for path in paths:
        d = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(d) or not os.access(d, os.W_OK):
            raise CliError(f"output directory not writable: {d}")
        if os.path.isdir(path):
            raise CliError(f"output path is a directory: {path}")


def _read_csv_array(path):
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    return arr


def _emit(obj):
    sys.stdout.write(json.dumps(rio._jsonable(obj), sort_keys=True) + "\n")


def _env_threads():
    val = os.environ.get("RMTLAB_THREADS")
    if val is None or val == "":
        return None
    try:
        t = int(val)
    except ValueError:
        raise CliError("RMTLAB_THREADS must be a positive integer") from None
    if t < 1:
        raise CliError("RMTLAB_THREADS must be a positive integer")
    return t


def config_from_args(args) -> ExperimentConfig:
    experiment = TAIL_COMMANDS[args.cmd]
    if getattr(args, "min_gap", False):
        experiment = "min-gap-tail"
    items = {}
    if args.config:
        items.update(parse_config_text(_read_text(args.config)))
    if items.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {items['experiment']!r}, not {experiment!r}")
    items["experiment"] = experiment
    for flag, key in _FLAG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            items[key] = val
    if args.out:
        items["output.csv"] = args.out + ".csv"
        items["output.json"] = args.out + ".json"
    for kv in args.set:
        if "=" not in kv:
            raise ConfigError(f"--set expects KEY=VALUE, got {kv!r}")
        key, val = kv.split("=", 1)
        items[key.strip()] = val.strip()
    if args.threads is not None:
        items["threads"] = args.threads
    env = _env_threads()
    if env is not None:
        items["threads"] = env
    return config_from_flat(items)


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_tail(args) -> int:
    from .experiments import fit_exponent, run_tail_experiment

    cfg = config_from_args(args)
    outs = [p for p in (cfg.output_csv, cfg.output_json, cfg.output_svg) if p]
    _check_writable(outs)
    t0 = time.perf_counter()
    curve = run_tail_experiment(cfg)
    try:
        fit = fit_exponent(curve)
    except ValueError:
        fit = None
    files = {}
    if cfg.output_csv:
        files[cfg.output_csv] = rio.curve_to_csv(curve)
    if cfg.output_json:
        files[cfg.output_json] = rio.dumps(rio.curve_summary(curve, fit, cfg.to_flat()))
    if cfg.output_svg:
        files[cfg.output_svg] = rio.curve_to_svg(curve, fit)
    rio.write_all(files)
    _emit({
        "command": args.cmd, "statistic": curve.statistic_name, "points": len(curve.eps_grid),
        "trials": curve.trials, "slope": None if fit is None else fit.slope,
        "slope_ci": None if fit is None else fit.slope_ci, "predicted_exponent": curve.predicted_exponent,
        "outputs": list(files), "wall_time_s": round(time.perf_counter() - t0, 3),
    })
    return 0


def cmd_rlogd(args) -> int:
    from .arithmetic import LcdParams, rd_matrix, rlogd_matrix, rlogd_subspace, rlogd_vector
    from .ensembles import parse_dist

    arr = _read_csv_array(args.vector)
    dist = parse_dist(args.dist)
    mode = {"vector": "vector", "matrix": "vector", "subspace": "subspace", "rd": "matrix-rd"}[args.mode]
    params = LcdParams(L=args.L, alpha=args.alpha, theta_max=args.theta_max, mode=mode, ratio=args.ratio,
                       rel_tol=args.rel_tol, seed=args.seed)
    if args.mode == "vector":
        res = rlogd_vector(arr.ravel(), params, dist)
    elif args.mode == "matrix":
        res = rlogd_matrix(arr, params, dist)
    elif args.mode == "subspace":
        res = rlogd_subspace(arr, params, dist)
    else:
        res = rd_matrix(arr, params, dist)
    _emit({"mode": args.mode, "lo": res.lo, "hi": res.hi, "found": res.found,
           "witness": None if res.witness is None else res.witness, "evaluations": res.evaluations,
           "heuristic": res.heuristic})
    return 0


def cmd_threshold(args) -> int:
    from .arithmetic import threshold_gL
    from .ensembles import MatrixProfile, ZeroedOutSpec, parse_dist

    v = _read_csv_array(args.vector).ravel()
    n = v.size
    spec = ZeroedOutSpec(n, args.k, args.d, nu=args.nu,
                         base_profile=MatrixProfile.homogeneous(n, parse_dist(args.dist)))
    res = threshold_gL(v, n, args.k, args.L, spec, trials=args.trials, seed=args.seed)
    _emit({"estimate": res.estimate, "lo": res.lo, "hi": res.hi, "trials": res.trials, "n": n, "k": args.k})
    return 0


def _suites():
    from .smallball import inequality_suite
    from .verify import SUITES

    out = dict(SUITES)
    out["inequalities"] = inequality_suite
    return out


def cmd_verify(args) -> int:
    suites = _suites()
    names = list(suites) if args.suite == "all" else [s.strip() for s in args.suite.split(",")]
    unknown = [s for s in names if s not in suites]
    if unknown:
        raise ConfigError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(suites)} or all")
    results = {}
    for name in names:
        rep = suites[name](seed=args.seed)
        results[name] = bool(rep["ok"])
    _emit({"command": "verify", "suites": results, "ok": all(results.values())})
    return 0 if all(results.values()) else 3


def cmd_report(args) -> int:
    from .experiments import ExponentFit, TailCurve

    try:
        with open(args.summary, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read summary {args.summary}: {exc}") from None
    rows = data.get("rows", [])
    curve = TailCurve(data.get("statistic", "?"), np.array([r["eps"] for r in rows], dtype=float),
                      np.array([r["successes"] for r in rows], dtype=np.int64),
                      int(rows[0]["trials"]) if rows else 1,
                      np.array([r["p_hat"] for r in rows], dtype=float),
                      np.array([r["ci_lo"] for r in rows], dtype=float),
                      np.array([r["ci_hi"] for r in rows], dtype=float),
                      float(rows[0]["scale"]) if rows else 1.0, data.get("predicted_exponent"))
    f = data.get("fit")
    fit = None if f is None else ExponentFit(f["slope"], f["intercept"], f["slope_ci"], tuple(f["fit_window"]),
                                             f["r_squared"], f.get("points", 0))
    files = {}
    if args.csv:
        files[args.csv] = rio.curve_to_csv(curve)
    if args.svg:
        files[args.svg] = rio.curve_to_svg(curve, fit)
    if args.config_out:
        files[args.config_out] = config_to_text(config_from_flat(data.get("config", {})))
    _check_writable(files)
    rio.write_all(files)
    _emit({"command": "report", "statistic": curve.statistic_name, "points": len(rows),
           "slope": None if fit is None else fit.slope, "outputs": list(files)})
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"rlogd": cmd_rlogd, "threshold": cmd_threshold, "verify": cmd_verify, "report": cmd_report}
    handler = handlers.get(args.cmd, cmd_tail)
    try:
        return handler(args)
    except (ConfigError, CliError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"rmtlab: error: {exc}\n")
        return 2


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
