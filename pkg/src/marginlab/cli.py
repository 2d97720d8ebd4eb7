"""``marginlab`` command-line runner.

Subcommands: ``gen``, ``canon``, ``solve``, ``run``, ``verify``, ``fit``.
Every flag can also come from a JSON file passed with ``--config`` (keys are
the flag names with dashes replaced by underscores); flags given on the
command line override the file.

Exit codes: 0 ok, 1 verification failure, 2 usage/config error or dataset
mismatch, 3 non-separable data, 4 numerical failure.
"""
import argparse
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import emit_report, fit_rate, verify_trajectory
from .dataset import CANONICAL, canonical, generate_separable, load_csv, store_csv, validate
from .deep import Architecture, riemannian_ascent
from .errors import (ConvergenceError, DatasetMismatchError, GenerationError, MarginLabError,
                     NonSeparableError, NumericalError)
from .kernel import KernelSpec, kernel_ascent
from .margin import DEFAULT_TOL, optimal_margin
from .optimizers import Schedule, Trajectory, flow_run, gd_run, geometric_steps
from .smooth import SmoothMarginParams

log = logging.getLogger("marginlab")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NONSEP, EXIT_NUMERIC = 0, 1, 2, 3, 4

SCHEDULES = ("flow", "gd-constant", "gd-adaptive", "gd-aggressive", "deep", "kernel")

DEFAULTS = {
    "gen": {"n": None, "m": None, "margin": None, "seed": 0, "out": None, "max_attempts": None},
    "canon": {"out_dir": "."},
    "solve": {"data": None, "tol": DEFAULT_TOL, "out": None},
    "run": {
        "data": None, "schedule": "flow", "beta": 1.0, "t_end": 100.0, "dt": None,
        "steps": 1000, "eta": None, "c": 1.0, "depth": 2, "widths": None,
        "kernel": "linear", "sigma": 1.0, "kernel_schedule": "gd-adaptive",
        "seed": 0, "per_decade": 20, "tol": DEFAULT_TOL, "out": None,
    },
    "verify": {"data": None, "run": None, "out": None, "tol": DEFAULT_TOL,
               "fit_field": None, "t_min": 0.0, "t_max": math.inf},
    "fit": {"run": None, "field": "deficit", "t_min": 0.0, "t_max": math.inf, "out": None},
}
REQUIRED = {
    "gen": ("n", "m", "margin", "out"),
    "solve": ("data",),
    "run": ("data", "out"),
    "verify": ("data", "run"),
    "fit": ("run",),
}


class UsageError(Exception):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="marginlab", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, help_):
        c = sub.add_parser(name, help=help_, argument_default=None)
        c.add_argument("--config", help="JSON file with flag values")
        c.add_argument("--no-timestamp", action="store_true", default=None,
                       help="omit the creation time from outputs")
        c.add_argument("-v", "--verbose", action="store_true", default=None)
        return c

    g = command("gen", "sample a separable dataset")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--margin", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.add_argument("--max-attempts", type=int)

    c = command("canon", "write the canonical datasets D1, D2, D3")
    c.add_argument("--out-dir")

    s = command("solve", "compute the optimal margin")
    s.add_argument("--data")
    s.add_argument("--tol", type=float)
    s.add_argument("--out")

    r = command("run", "run a schedule and record a trajectory")
    r.add_argument("--data")
    r.add_argument("--schedule", choices=SCHEDULES)
    r.add_argument("--beta", type=float)
    r.add_argument("--t-end", type=float)
    r.add_argument("--dt", type=float)
    r.add_argument("--steps", type=int)
    r.add_argument("--eta", type=float)
    r.add_argument("--c", type=float)
    r.add_argument("--depth", type=int)
    r.add_argument("--widths", help="comma-separated hidden widths")
    r.add_argument("--kernel", choices=("linear", "rbf"))
    r.add_argument("--sigma", type=float)
    r.add_argument("--kernel-schedule", choices=SCHEDULES[1:4])
    r.add_argument("--seed", type=int)
    r.add_argument("--per-decade", type=int)
    r.add_argument("--tol", type=float)
    r.add_argument("--out", help="output directory")

    v = command("verify", "check a recorded run against the bounds")
    v.add_argument("--data")
    v.add_argument("--run", help="run directory")
    v.add_argument("--out", help="report JSON path")
    v.add_argument("--tol", type=float)
    v.add_argument("--fit-field", choices=("deficit", "bias"))
    v.add_argument("--t-min", type=float)
    v.add_argument("--t-max", type=float)

    f = command("fit", "log-log slope of a trajectory column")
    f.add_argument("--run")
    f.add_argument("--field")
    f.add_argument("--t-min", type=float)
    f.add_argument("--t-max", type=float)
    f.add_argument("--out")
    return p


def resolve_config(args):
    """Merge defaults <- config file <- command-line flags."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    cfg["no_timestamp"] = False
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {cmd}: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if key in cfg and val is not None:
            cfg[key] = val
    missing = [k for k in REQUIRED.get(cmd, ()) if cfg.get(k) is None]
    if missing:
        raise UsageError(f"{cmd}: missing " + ", ".join("--" + k.replace("_", "-") for k in missing))
    for key in ("t_min", "t_max"):
        if key in cfg:
            try:
                cfg[key] = float(cfg[key])
            except (TypeError, ValueError):
                raise UsageError(f"{key} must be a number") from None
    tol = cfg.get("tol")
    if tol is not None and not tol > 0:
        raise UsageError("tol must be positive")
    return cfg


def _meta(cmd, cfg):
    meta = {"command": cmd, "version": __version__, "config": _jsonable(cfg)}
    if not cfg.get("no_timestamp"):
        meta["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, allow_nan=False)
        fh.write("\n")


def _load(path):
    d = load_csv(path, name=Path(path).name)
    outcome = validate(d)
    if not outcome:
        v = outcome.violations[0]
        raise UsageError(f"{path}: {v.kind} at row {v.index} (magnitude {v.magnitude:g})")
    return d


def cmd_gen(cfg):
    try:
        d = generate_separable(cfg["n"], cfg["m"], cfg["margin"], cfg["seed"], cfg["max_attempts"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    store_csv(d, cfg["out"])
    _write_json({"meta": _meta("gen", cfg), "dataset_id": d.fingerprint()}, cfg["out"] + ".json")
    log.info("wrote %s (%d x %d)", cfg["out"], d.n, d.m)
    return EXIT_OK


def cmd_canon(cfg):
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    for name in CANONICAL:
        store_csv(canonical(name), out / f"{name}.csv")
    return EXIT_OK


def cmd_solve(cfg):
    d = _load(cfg["data"])
    sol = optimal_margin(d, tol=cfg["tol"])
    out = {**sol.to_dict(), "meta": _meta("solve", cfg)}
    if cfg["out"]:
        _write_json(out, cfg["out"])
    print(f"gamma_opt {sol.gamma_opt:.10g}")
    return EXIT_OK


def _hidden_widths(cfg, m):
    depth = int(cfg["depth"])
    if depth < 1:
        raise UsageError("depth must be >= 1")
    if cfg["widths"] in (None, ""):
        hidden = [m] * (depth - 1)
    else:
        raw = cfg["widths"]
        hidden = [int(w) for w in (raw.split(",") if isinstance(raw, str) else raw)]
        if len(hidden) == 1:
            hidden = hidden * (depth - 1)
        if len(hidden) != depth - 1:
            raise UsageError(f"--widths needs {depth - 1} hidden widths for depth {depth}")
    return Architecture.from_hidden(m, hidden)


def _schedule(name, cfg):
    kind = name.replace("-", "_")
    if kind == "gd_aggressive":
        return Schedule.aggressive(cfg["c"])
    eta = 1.0 if cfg["eta"] is None else cfg["eta"]
    return Schedule(kind, eta=eta)


def cmd_run(cfg):
    d = _load(cfg["data"])
    try:
        p = SmoothMarginParams(cfg["beta"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sol = optimal_margin(d, tol=cfg["tol"])
    kind = cfg["schedule"]
    pd = cfg["per_decade"]
    if kind == "flow":
        dt = 0.05 / p.beta if cfg["dt"] is None else cfg["dt"]
        steps = max(int(round(cfg["t_end"] / dt)), 1)
        traj = flow_run(d, p, t_end=cfg["t_end"], dt=dt,
                        record_at=geometric_steps(1, steps, pd) * dt, sol=sol)
    elif kind == "deep":
        arch = _hidden_widths(cfg, d.m)
        eta = 0.1 if cfg["eta"] is None else cfg["eta"]
        traj = riemannian_ascent(d, arch, p, steps=cfg["steps"], eta=eta, seed=cfg["seed"], sol=sol,
                                 record_at=geometric_steps(1, cfg["steps"], pd))
    elif kind == "kernel":
        spec = KernelSpec(cfg["kernel"], cfg["sigma"])
        traj = kernel_ascent(d, spec, p, steps=cfg["steps"], schedule=_schedule(cfg["kernel_schedule"], cfg),
                             record_at=geometric_steps(1, cfg["steps"], pd))
    else:
        traj = gd_run(d, p, _schedule(kind, cfg), steps=cfg["steps"],
                      record_at=geometric_steps(1, cfg["steps"], pd), sol=sol)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv")
    _write_json({"run": traj.meta, "meta": _meta("run", cfg)}, out / "trajectory.json")
    _write_json({**sol.to_dict(), "meta": _meta("run", cfg)}, out / "solution.json")
    log.info("%s: %d records written to %s", kind, len(traj), out)
    return EXIT_OK


def _read_run(run_dir):
    run_dir = Path(run_dir)
    try:
        with open(run_dir / "trajectory.json", encoding="utf-8") as fh:
            meta = json.load(fh)["run"]
        return Trajectory.from_csv(run_dir / "trajectory.csv", meta)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read run directory {run_dir}: {exc}") from None


def cmd_verify(cfg):
    d = _load(cfg["data"])
    traj = _read_run(cfg["run"])
    if traj.meta.get("dataset_id") not in (None, "", d.fingerprint()):
        raise DatasetMismatchError(
            f"run {cfg['run']} was produced on dataset {traj.meta['dataset_id']}, not {d.fingerprint()}")
    sol = optimal_margin(d, tol=cfg["tol"])
    rep = verify_trajectory(traj, d, sol)
    fits = []
    if cfg["fit_field"]:
        fits.append(fit_rate(traj, cfg["fit_field"], cfg["t_min"], cfg["t_max"]))
    for c in rep.failures():
        print(f"FAIL {c.name}: {c.count_applicable - c.count_passed}/{c.count_applicable} records, "
              f"worst slack {c.worst_slack:.3e} at t={c.location_of_worst}")
    print(f"verification {rep.summary} ({len(rep.checks)} checks)")
    if cfg["out"]:
        emit_report([rep], fits, cfg["out"], meta=_jsonable(_meta("verify", cfg)))
    return EXIT_OK if rep.summary == "pass" else EXIT_VERIFY


def cmd_fit(cfg):
    traj = _read_run(cfg["run"])
    fit = fit_rate(traj, cfg["field"], cfg["t_min"], cfg["t_max"])
    print(f"{fit.field}: slope {fit.slope:.6f} intercept {fit.intercept:.6f} "
          f"r2 {fit.r_squared:.6f} over {fit.n_points} points")
    if cfg["out"]:
        _write_json({"fits": [fit.to_dict()], "meta": _meta("fit", cfg)}, cfg["out"])
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "canon": cmd_canon, "solve": cmd_solve, "run": cmd_run,
            "verify": cmd_verify, "fit": cmd_fit}


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except NonSeparableError as exc:
        log.error("%s", exc)
        return EXIT_NONSEP
    except (NumericalError, ConvergenceError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (UsageError, DatasetMismatchError, GenerationError, MarginLabError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
