"""Inequality checks over trajectories, log-log rate fits and JSON reports.

Every check compares a measured quantity against a bound and records the
slack ``bound - measured`` (negative slack = violation).
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetMismatchError, RateFitError
from .margin import CHECK_SLACK
from .optimizers import EPS_INT

RATE_FLOOR = 1e-12
TRACE_TOL = 1e-10
NORM_GROWTH_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    count_applicable: int
    count_passed: int
    worst_slack: float
    location_of_worst: float | None

    @property
    def passed(self):
        return self.count_passed == self.count_applicable

    def to_dict(self):
        return {
            "name": self.name,
            "count_applicable": self.count_applicable,
            "count_passed": self.count_passed,
            "worst_slack": self.worst_slack,
            "location_of_worst": self.location_of_worst,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple
    meta: dict = field(default_factory=dict)

    @property
    def summary(self):
        return "pass" if all(c.passed for c in self.checks) else "fail"

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if not c.passed]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int
    field: str = ""

    def to_dict(self):
        return {
            "field": self.field,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
        }


def _check(name, t, measured, bound, mask=None):
    """``measured <= bound`` at every record selected by ``mask``."""
    t = np.asarray(t, dtype=float)
    measured, bound = np.broadcast_arrays(np.asarray(measured, dtype=float),
                                          np.asarray(bound, dtype=float), t)[:2]
    slack = bound - measured
    if mask is None:
        mask = np.ones(slack.shape, dtype=bool)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return CheckResult(name, 0, 0, 0.0, None)
    s = slack[idx]
    s = np.where(np.isnan(s), -np.inf, s)
    worst = int(idx[np.argmin(s)])
    worst_slack = float(np.min(s))
    if not math.isfinite(worst_slack):
        worst_slack = -float(np.finfo(float).max)
    loc = float(t[worst])
    return CheckResult(name, int(idx.size), int(np.sum(s >= 0.0)), worst_slack,
                       loc if math.isfinite(loc) else None)


def _scalar_check(name, measured, bound, location=None):
    return _check(name, np.array([np.nan if location is None else location]),
                  [measured], [bound])


def _ensure_same_dataset(traj, d, sol):
    fp = d.fingerprint()
    tid = traj.meta.get("dataset_id")
    if tid and tid != fp:
        raise DatasetMismatchError(f"trajectory was produced on dataset {tid}, not {fp}")
    if sol is not None and getattr(sol, "dataset_id", "") and sol.dataset_id != fp:
        raise DatasetMismatchError(f"solution belongs to dataset {sol.dataset_id}, not {fp}")


def _interlace(t, deficit, bias, margin, gamma, radius, prefix=""):
    lower = _check(f"{prefix}interlace_lower", t, deficit / radius, bias + CHECK_SLACK)
    upper = _check(f"{prefix}interlace_upper", t, bias,
                   2.0 * np.sqrt(np.maximum(deficit, 0.0) / gamma) + CHECK_SLACK,
                   mask=margin >= 0.0)
    return [lower, upper]


def _linear_checks(traj, d, sol):
    t = traj.t
    gamma = sol.gamma_opt
    meta = traj.meta
    checks = _interlace(t, traj.deficit, traj.bias, traj.margin, gamma, d.radius)
    checks.append(_check("grad_norm_lower", t, gamma - CHECK_SLACK - sol.dual_gap, traj.grad_norm))
    checks.append(_check("grad_norm_upper", t, traj.grad_norm, 1.0 + CHECK_SLACK))
    checks.append(_check("deficit_floor", t, -traj.deficit, CHECK_SLACK + sol.dual_gap))
    if meta.get("kind") != "flow":
        return checks

    beta = float(meta.get("beta", 1.0))
    eps = float(meta.get("eps_int", EPS_INT))
    logn = math.log(d.n)
    past = t >= logn / (beta * gamma * gamma)
    rate = logn / (beta * gamma * t)
    rate_bound = rate * (1.0 + eps) + RATE_FLOOR
    a = _check("flow_margin_rate", t, traj.deficit, rate_bound, mask=past)
    chained = 2.0 * np.sqrt(rate_bound / gamma) + CHECK_SLACK
    e = _check("chained_bias", t, traj.bias, chained, mask=past)
    checks += [
        a,
        _check("flow_energy", t, gamma * gamma * t * (1.0 - eps), traj.smooth_margin),
        _check("flow_norm_growth", t, traj.norm_w, t * (1.0 + NORM_GROWTH_TOL)),
        e,
    ]
    # (a) and interlace_upper together imply the chained bound
    upper_ok = traj.bias <= 2.0 * np.sqrt(np.maximum(traj.deficit, 0.0) / gamma) + CHECK_SLACK
    premise = past & (traj.deficit <= rate_bound) & upper_ok & (traj.margin >= 0.0)
    checks.append(_check("chain_implication", t, traj.bias, chained, mask=premise))
    if "max_smooth_drop" in meta:
        checks.append(_scalar_check("smooth_ascent", float(meta["max_smooth_drop"]), CHECK_SLACK))
    return checks


def _deep_checks(traj, d, sol):
    t = traj.t
    gamma = sol.gamma_opt
    applicable = traj.margin >= 0.0
    ratio = np.maximum(1.0 - traj.margin / gamma, 0.0)
    normalized_deficit = gamma - traj.margin / traj.norm_w
    checks = [
        _check("deep_margin_bound", t, traj.margin, gamma + CHECK_SLACK + sol.dual_gap),
        _check("product_bias_bound", t, traj.extra["product_dist"],
               2.0 * np.sqrt(ratio) + CHECK_SLACK, mask=applicable),
        _check("normalized_product_bias_bound", t, traj.bias,
               2.0 * np.sqrt(ratio) + CHECK_SLACK, mask=applicable),
    ]
    checks += _interlace(t, normalized_deficit, traj.bias, traj.margin, gamma, d.radius)
    if "trace_identity_max" in traj.meta:
        checks.append(_scalar_check("trace_identity", float(traj.meta["trace_identity_max"]), TRACE_TOL))
    return checks


def _kernel_checks(traj, d):
    from .kernel import KernelSpec, gram, kernel_optimal_margin

    spec = KernelSpec(**traj.meta.get("kernel", {}))
    gamma_h, _ = kernel_optimal_margin(d, spec)
    radius_h = math.sqrt(float(np.max(np.diag(gram(d, spec)))))
    t = traj.t
    checks = [
        _check("rkhs_weak_duality", t, traj.margin, gamma_h + CHECK_SLACK),
        _check("grad_norm_lower", t, gamma_h - CHECK_SLACK, traj.grad_norm),
        _check("grad_norm_upper", t, traj.grad_norm, radius_h + CHECK_SLACK),
    ]
    if "h_dist" in traj.extra:
        checks += _interlace(t, traj.deficit, traj.extra["h_dist"], traj.margin,
                             gamma_h, radius_h, prefix="rkhs_")
    return checks


def verify_trajectory(traj, d, sol):
    """Evaluate every applicable inequality at every record of ``traj``.

    Which checks run depends on ``traj.meta["kind"]``: flow runs get the
    margin-rate, energy, norm-growth and chained-bias checks on top of the
    interlace and gradient-norm checks shared with the GD schedules; deep
    and kernel runs get their own sets.

    Raises
    ------
    DatasetMismatchError
        If ``traj`` or ``sol`` was produced on a different dataset.
    """
    _ensure_same_dataset(traj, d, sol)
    kind = traj.meta.get("kind", "")
    if kind == "deep":
        checks = _deep_checks(traj, d, sol)
    elif kind == "kernel":
        checks = _kernel_checks(traj, d)
    else:
        checks = _linear_checks(traj, d, sol)
    meta = {
        "kind": kind,
        "dataset_id": d.fingerprint(),
        "records": len(traj),
        "gamma_opt": sol.gamma_opt,
    }
    return VerificationReport(tuple(checks), meta)


def fit_power_law(t, values, field=""):
    """Least squares of ``log(values)`` on ``log(t)``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 5:
        raise RateFitError(f"need at least 5 points in the window, got {t.size}")
    if np.any(y <= 0.0) or np.any(t <= 0.0):
        raise RateFitError("non-positive values in the fit window (below the numerical floor?); shrink the window")
    lx, ly = np.log(t), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    # a flat series is fitted exactly; its ss_tot is rounding noise
    flat = np.ptp(ly) <= 1e-12 * max(1.0, float(np.max(np.abs(ly))))
    r2 = 1.0 if flat else 1.0 - float(resid @ resid) / ss_tot
    return RateFit(float(slope), float(intercept), r2, (float(t.min()), float(t.max())), int(t.size), field)


def fit_rate(traj, field="deficit", t_min=0.0, t_max=math.inf):
    """Fit ``field ~ C * t^slope`` over records with ``t_min <= t <= t_max``."""
    if field not in traj.column_names:
        raise ValueError(f"unknown field {field!r}")
    mask = (traj.t >= t_min) & (traj.t <= t_max)
    return fit_power_law(traj.t[mask], traj.column(field)[mask], field)


def report_dict(reports, fits, meta=None):
    checks = []
    for k, rep in enumerate(reports):
        label = rep.meta.get("label", str(k))
        for c in rep.checks:
            checks.append({"report": label, **c.to_dict()})
    summary = "pass" if all(r.summary == "pass" for r in reports) else "fail"
    return {
        "summary": summary,
        "checks": checks,
        "fits": [f.to_dict() for f in fits],
        "meta": dict(meta or {}),
    }


def emit_report(reports, fits, path, meta=None):
    """Write the JSON report; returns the dictionary written."""
    out = report_dict(reports, fits, meta)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2, allow_nan=False)
        fh.write("\n")
    return out
