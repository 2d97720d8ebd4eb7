"""Margins in a reproducing-kernel Hilbert space.

A function ``f = sum_j alpha_j k(., x_j)`` has ``||f||_H^2 = alpha' K alpha``
and margin ``min_i y_i (K alpha)_i``. With the signed Gram matrix
``G = diag(y) K diag(y)`` the optimal RKHS margin is
``min_{q in simplex} sqrt(q' G q)``, the same dual as the linear case.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError
from .margin import DEFAULT_TOL, min_norm_gram
from .optimizers import EPS_INT, MAX_NORM, Schedule, Trajectory, _check_status, geometric_steps
from .smooth import DEFAULT_PARAMS, softmin_stats

PSD_TOL = 1e-9
ZERO_FUNCTION = 1e-24


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and not self.sigma > 0:
            raise ValueError("rbf bandwidth sigma must be positive")

    def to_dict(self):
        return {"kind": self.kind, "sigma": self.sigma}


@dataclass(frozen=True)
class KernelModel:
    alpha: np.ndarray


def gram(d, k=KernelSpec()):
    X = d.features
    if k.kind == "linear":
        K = X @ X.T
    else:
        sq = np.sum(X * X, axis=1)
        dist2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
        K = np.exp(-dist2 / (2.0 * k.sigma**2))
    K = 0.5 * (K + K.T)
    if min_eigenvalue(K) < -PSD_TOL:
        raise NumericalError("Gram matrix is not positive semidefinite")
    return K


def min_eigenvalue(K):
    return float(np.linalg.eigvalsh(K)[0])


def signed_gram(d, k=KernelSpec()):
    y = d.labels
    return y[:, None] * gram(d, k) * y[None, :]


def kernel_optimal_margin(d, k=KernelSpec(), tol=DEFAULT_TOL):
    """``(gamma_H, q_star)`` with ``gamma_H = min_q sqrt(q' G q)``."""
    q, value2, _ = min_norm_gram(signed_gram(d, k), tol=tol)
    return math.sqrt(value2), q


def kernel_margin(model, d, k=KernelSpec(), K=None):
    """Margin of the H-normalized function with coefficients ``model.alpha``."""
    K = gram(d, k) if K is None else K
    a = np.asarray(model.alpha, dtype=float)
    h2 = float(a @ K @ a)
    if h2 <= ZERO_FUNCTION:
        raise ValueError("zero function has no margin")
    return float(np.min(d.labels * (K @ a))) / math.sqrt(h2)


def max_margin_alpha(d, q_star, G):
    """Coefficients of the unit-norm max-margin function."""
    return d.labels * q_star / math.sqrt(float(q_star @ G @ q_star))


def kernel_ascent(d, k=KernelSpec(), p=None, steps=1000, schedule=None, record_at=None):
    """Functional gradient ascent on the smoothed margin, from ``f = 0``.

    In coefficients the step is ``alpha += eta_t * y * qhat``. The ``bias``
    column holds the margin deficit; the RKHS distance between normalized
    functions goes in the extra ``h_dist`` column.
    """
    p = p or DEFAULT_PARAMS
    schedule = schedule or Schedule.adaptive()
    if schedule.kind == "flow":
        raise ValueError("kernel_ascent supports the gradient-descent schedules only")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    K = gram(d, k)
    y = d.labels
    G = y[:, None] * K * y[None, :]
    gamma_h, q_star = kernel_optimal_margin(d, k)
    alpha_star = max_margin_alpha(d, q_star, G)
    rec = geometric_steps(1, steps) if record_at is None else np.unique(
        np.clip(np.asarray(record_at, dtype=np.int64), 1, steps))
    if schedule.kind == "gd_constant":
        kind, eta = _kernels.CONSTANT, schedule.eta
    elif schedule.kind == "gd_adaptive":
        kind, eta = _kernels.ADAPTIVE, schedule.eta
    else:
        kind, eta = _kernels.CONSTANT, schedule.c * p.beta
    C, status, fail, max_drop = _kernels.dual_ascent_loop(G, p.beta, kind, eta, steps, rec, MAX_NORM)
    _check_status(status, fail, "kernel ascent")
    rows, h_dist = [], []
    for c in C:
        u = G @ c
        hn = math.sqrt(float(c @ u))
        r, q = softmin_stats(u, p.beta)
        marg = float(u.min()) / hn
        a = y * c / hn
        diff = a - alpha_star
        rows.append((hn, marg, r, math.sqrt(max(float(q @ G @ q), 0.0)), gamma_h - marg, gamma_h - marg))
        h_dist.append(math.sqrt(max(float(diff @ K @ diff), 0.0)))
    cols = np.array(rows, dtype=float).reshape(-1, 6)
    meta = {
        "kind": "kernel",
        "dataset_id": d.fingerprint(),
        "dataset_name": d.name,
        "n": d.n,
        "m": d.m,
        "beta": p.beta,
        "kernel": k.to_dict(),
        "gamma_opt": gamma_h,
        "radius_h": math.sqrt(float(np.max(np.diag(K)))),
        "schedule": schedule.to_dict(),
        "steps": int(steps),
        "eps_int": EPS_INT,
        "max_smooth_drop": float(max_drop),
        "backend": _kernels.BACKEND,
    }
    return Trajectory(rec.astype(float), *cols.T, extra={"h_dist": h_dist}, meta=meta)

