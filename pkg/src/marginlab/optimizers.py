"""Gradient flow and gradient-descent schedules on the smoothed margin.

All runs start from ``w(0) = 0``. The inner loops live in
:mod:`marginlab._kernels`; this module turns recorded iterates into
:class:`Trajectory` tables.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericalError
from .margin import optimal_margin
from .smooth import DEFAULT_PARAMS, softmin_stats

COLUMNS = ("t", "norm_w", "margin", "smooth_margin", "grad_norm", "bias", "deficit")
MAX_NORM = 1e6
EPS_INT = 1e-3
SCHEDULE_KINDS = ("flow", "gd_constant", "gd_adaptive", "gd_aggressive")


@dataclass(frozen=True)
class Schedule:
    """Step-size rule. ``eta`` is the constant step (or the adaptive
    numerator), ``c`` the aggressive-step constant."""

    kind: str
    eta: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if not (self.eta > 0.0 and self.c > 0.0):
            raise ValueError("eta and c must be positive")

    @classmethod
    def flow(cls):
        return cls("flow")

    @classmethod
    def constant(cls, eta=1.0):
        return cls("gd_constant", eta=eta)

    @classmethod
    def adaptive(cls, eta=1.0):
        return cls("gd_adaptive", eta=eta)

    @classmethod
    def aggressive(cls, c=1.0):
        return cls("gd_aggressive", c=c)

    def to_dict(self):
        return {"kind": self.kind, "eta": self.eta, "c": self.c}


@dataclass
class Trajectory:
    """Recorded run: one row per record time, plus free-form ``meta``.

    ``extra`` holds optional columns (``h_dist`` for kernel runs,
    ``product_dist`` for deep runs); they are written after the fixed ones.
    """

    t: np.ndarray
    norm_w: np.ndarray
    margin: np.ndarray
    smooth_margin: np.ndarray
    grad_norm: np.ndarray
    bias: np.ndarray
    deficit: np.ndarray
    extra: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        size = None
        for name in COLUMNS:
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            setattr(self, name, arr)
            if size is None:
                size = arr.size
            elif arr.size != size:
                raise ValueError(f"column {name} has {arr.size} rows, expected {size}")
        self.extra = {k: np.asarray(v, dtype=float).reshape(-1) for k, v in self.extra.items()}
        for k, v in self.extra.items():
            if v.size != size:
                raise ValueError(f"extra column {k} has {v.size} rows, expected {size}")
        if size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("record times must be strictly increasing")

    def __len__(self):
        return self.t.size

    @property
    def column_names(self):
        return COLUMNS + tuple(self.extra)

    def column(self, name):
        if name in COLUMNS:
            return getattr(self, name)
        return self.extra[name]

    def to_csv(self, path):
        names = self.column_names
        cols = [self.column(n) for n in names]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(names) + "\n")
            for row in zip(*cols):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, meta=None):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        if tuple(header[:len(COLUMNS)]) != COLUMNS:
            raise ValueError(f"unexpected trajectory header {','.join(header)}")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        data = data.reshape(-1, len(header))
        fixed = {name: data[:, k] for k, name in enumerate(COLUMNS)}
        extra = {name: data[:, k] for k, name in enumerate(header) if k >= len(COLUMNS)}
        return cls(**fixed, extra=extra, meta=dict(meta or {}))


def geometric_steps(first, last, per_decade=20):
    """Sorted unique integers spaced geometrically in ``[first, last]``, both included."""
    first, last = max(int(first), 1), int(last)
    if last < first:
        raise ValueError("last must be >= first")
    k = max(int(math.ceil(per_decade * math.log10(last / first))) + 1, 2)
    pts = np.unique(np.rint(np.geomspace(first, last, k)).astype(np.int64))
    return pts


def _linear_rows(W, d, beta, sol):
    S = d.signed
    rows = []
    for w in W:
        nrm = float(np.linalg.norm(w))
        u = S @ w
        r, q = softmin_stats(u, beta)
        wt = w / nrm
        marg = float(u.min()) / nrm
        rows.append((nrm, marg, r, float(np.linalg.norm(q @ S)),
                     float(np.linalg.norm(wt - sol.w_opt)), sol.gamma_opt - marg))
    return np.array(rows, dtype=float).reshape(-1, 6)


def _finish(t, W, d, p, sol, meta):
    rows = _linear_rows(W, d, p.beta, sol)
    return Trajectory(t, *rows.T, meta=meta)


def _base_meta(d, p, sol, kind):
    return {
        "kind": kind,
        "dataset_id": d.fingerprint(),
        "dataset_name": d.name,
        "n": d.n,
        "m": d.m,
        "beta": p.beta,
        "gamma_opt": sol.gamma_opt,
        "eps_int": EPS_INT,
        "backend": _kernels.BACKEND,
    }


def _check_status(status, fail, what):
    if status:
        raise NumericalError(f"{what}: iterate diverged or became non-finite at step {fail}")


def flow_run(d, p=None, t_end=100.0, dt=None, record_at=None, sol=None):
    """Integrate ``dw/dt = grad R_beta(w)``, ``w(0) = 0``, with fixed-step RK4.

    ``dt`` defaults to ``0.05 / beta``. Records are taken at the grid points
    nearest to ``record_at`` (default: geometric grid from ``dt`` to
    ``t_end``).
    """
    p = p or DEFAULT_PARAMS
    sol = sol or optimal_margin(d)
    dt = 0.05 / p.beta if dt is None else float(dt)
    if not (t_end > 0 and dt > 0):
        raise ValueError("t_end and dt must be positive")
    steps = max(int(round(t_end / dt)), 1)
    if record_at is None:
        rec = geometric_steps(1, steps)
    else:
        rec = np.unique(np.clip(np.rint(np.asarray(record_at, dtype=float) / dt), 1, steps).astype(np.int64))
    W, status, fail, max_drop = _kernels.rk4_loop(d.signed, p.beta, dt, steps, rec, MAX_NORM)
    _check_status(status, fail, "gradient flow (reduce dt)")
    meta = _base_meta(d, p, sol, "flow")
    meta.update(schedule=Schedule.flow().to_dict(), dt=dt, t_end=steps * dt, steps=steps,
                max_smooth_drop=float(max_drop))
    return _finish(rec * dt, W, d, p, sol, meta)


def gd_run(d, p=None, schedule=None, steps=1000, record_at=None, sol=None):
    """Gradient ascent on the smoothed margin under ``schedule``.

    ``gd_aggressive`` descends the exponential risk with ``eta_t = c / R_n``;
    in log-space this is the step ``w += c * beta * sum qhat_i s_i``.
    """
    p = p or DEFAULT_PARAMS
    schedule = schedule or Schedule.adaptive()
    if schedule.kind == "flow":
        raise ValueError("use flow_run for the flow schedule")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    sol = sol or optimal_margin(d)
    if record_at is None:
        rec = geometric_steps(1, steps)
    else:
        rec = np.unique(np.clip(np.asarray(record_at, dtype=np.int64), 1, steps))
    if schedule.kind == "gd_constant":
        kind, eta = _kernels.CONSTANT, schedule.eta
    elif schedule.kind == "gd_adaptive":
        kind, eta = _kernels.ADAPTIVE, schedule.eta
    else:
        kind, eta = _kernels.CONSTANT, schedule.c * p.beta
    W, status, fail, max_drop = _kernels.ascent_loop(d.signed, p.beta, kind, eta, steps, rec, MAX_NORM)
    _check_status(status, fail, schedule.kind)
    meta = _base_meta(d, p, sol, schedule.kind)
    meta.update(schedule=schedule.to_dict(), steps=int(steps), max_smooth_drop=float(max_drop))
    return _finish(rec.astype(float), W, d, p, sol, meta)
