"""Smoothed margin (soft-min at inverse temperature beta) and exponential risk.

    R_beta(w) = -(1/beta) * log( (1/n) * sum_i exp(-beta * u_i) ),  u_i = y_i x_i . w

All evaluations go through a max-shifted log-sum-exp, so they are finite for
any finite ``w``.
"""
import math
from dataclasses import dataclass

import numpy as np

LOG_MAX_FLOAT = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class SmoothMarginParams:
    beta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ValueError(f"beta must be finite and positive, got {self.beta}")


DEFAULT_PARAMS = SmoothMarginParams()


def _beta(p):
    return DEFAULT_PARAMS.beta if p is None else p.beta


def softmin_stats(u, beta):
    """``(R, qhat)`` for per-sample margins ``u``."""
    u = np.asarray(u, dtype=float)
    umin = float(u.min())
    e = np.exp(-beta * (u - umin))
    z = float(e.sum())
    return umin - math.log(z / u.shape[0]) / beta, e / z


def margins(w, d):
    return d.signed @ np.asarray(w, dtype=float)


def boltzmann_weights(w, d, p=None):
    """``qhat_i proportional to exp(-beta u_i)``."""
    return softmin_stats(margins(w, d), _beta(p))[1]


def smooth_margin_value(w, d, p=None):
    return softmin_stats(margins(w, d), _beta(p))[0]


def smooth_margin_grad(w, d, p=None):
    """``sum_i qhat_i s_i``; its norm always lies in ``[gamma_opt, 1]``."""
    return boltzmann_weights(w, d, p) @ d.signed


def log_empirical_risk(w, d, p=None):
    """``log((1/n) sum exp(-beta u_i))``, equal to ``-beta * R_beta(w)``."""
    return -_beta(p) * smooth_margin_value(w, d, p)


def empirical_risk(w, d, p=None):
    """``(1/n) sum_i exp(-beta u_i)``.

    Raises ``OverflowError`` when a term would overflow; use
    :func:`log_empirical_risk` instead in that regime.
    """
    beta = _beta(p)
    u = margins(w, d)
    if beta * float(np.max(-u)) > LOG_MAX_FLOAT:
        raise OverflowError("exponential risk overflows; use log_empirical_risk")
    return float(np.mean(np.exp(-beta * u)))
