"""Hard margins, the optimal margin through its simplex dual, and the
subgradient quantities behind the margin/bias inequalities.

The optimal margin is computed as the minimum-norm point of the convex hull
of the signed points::

    gamma_opt = min_{q in simplex} || sum_i q_i s_i ||

solved by away-step Frank-Wolfe on ``q -> q' G q`` with ``G = S S'``.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, NonSeparableError

DEFAULT_TOL = 1e-10
MAX_ITER = 10**6
SUPPORT_EPS = 1e-7
SEPARABILITY_THRESHOLD = 1e-6
CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class MarginSolution:
    """Certified max-margin solution of a dataset.

    ``dual_gap`` is ``||v|| - gamma(w_opt)`` with ``v = sum q*_i s_i``; the
    true optimal margin lies in ``[gamma(w_opt), ||v||]``.
    """

    gamma_opt: float
    q_star: np.ndarray
    w_opt: np.ndarray
    support: tuple
    dual_gap: float
    dataset_id: str = ""

    def to_dict(self):
        return {
            "gamma_opt": self.gamma_opt,
            "w_opt": [float(v) for v in self.w_opt],
            "q_star": [float(v) for v in self.q_star],
            "support": [int(i) for i in self.support],
            "dual_gap": self.dual_gap,
            "dataset_id": self.dataset_id,
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(float(obj["gamma_opt"]), np.asarray(obj["q_star"], dtype=float),
                   np.asarray(obj["w_opt"], dtype=float), tuple(obj["support"]),
                   float(obj["dual_gap"]), obj.get("dataset_id", ""))


def hard_margin(w, d):
    """``min_i y_i x_i . w`` (not normalized)."""
    return float(np.min(d.signed @ np.asarray(w, dtype=float)))


def normalize(w):
    w = np.asarray(w, dtype=float)
    nrm = np.linalg.norm(w)
    if not nrm > 0.0:
        raise ValueError("cannot normalize a zero vector")
    return w / nrm


def _fw_gap(G, q):
    Gq = G @ q
    return max(2.0 * (float(q @ Gq) - float(Gq.min())), 0.0)


def _polish(G, q):
    """Exact minimizer of q'Gq on the affine hull of the active face, if feasible."""
    active = np.flatnonzero(q > 0.0)
    k = active.size
    if k < 2:
        return q
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2.0 * G[np.ix_(active, active)]
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
    if not np.all(np.isfinite(sol)) or sol.min() < -1e-12:
        return q
    cand = np.zeros_like(q)
    cand[active] = np.maximum(sol, 0.0)
    cand /= cand.sum()
    return cand


def min_norm_gram(G, tol=DEFAULT_TOL, start=0, max_iter=MAX_ITER):
    """Minimize ``q' G q`` over the simplex for a PSD matrix ``G``.

    Returns ``(q, value_squared, gap)`` where ``gap`` is the Frank-Wolfe
    gap certificate: ``q'Gq - min q'Gq <= gap``.
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] < 1:
        raise ValueError("G must be a non-empty square matrix")
    if not 0 <= start < G.shape[0]:
        raise ValueError(f"start vertex {start} out of range")
    q, gap, _ = _kernels.fw_simplex(G, start, tol, max_iter)
    polished = _polish(G, q)
    pgap = _fw_gap(G, polished)
    if pgap <= gap and float(polished @ G @ polished) <= float(q @ G @ q) + 1e-15:
        q, gap = polished, pgap
    if gap > tol:
        raise ConvergenceError(f"Frank-Wolfe gap {gap:.3e} > tol {tol:.1e} after {max_iter} iterations")
    return q, max(float(q @ G @ q), 0.0), gap


def min_norm_point(points, tol=DEFAULT_TOL, start=0, max_iter=MAX_ITER):
    """Minimum-norm point of the convex hull of ``points`` (k x m).

    Returns ``(q, value, gap)`` with ``value = ||sum q_i p_i||`` and ``gap``
    the Frank-Wolfe gap on the squared norm.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    q, _, gap = min_norm_gram(P @ P.T, tol=tol, start=start, max_iter=max_iter)
    return q, float(np.linalg.norm(q @ P)), gap


def optimal_margin(d, tol=DEFAULT_TOL, start=0, eps_sv=SUPPORT_EPS):
    """Optimal margin, max-margin direction and support set of ``d``.

    Raises
    ------
    NonSeparableError
        If the min-norm value is at or below ``max(tol, 1e-6)``.
    """
    S = d.signed
    q, _, _ = min_norm_gram(S @ S.T, tol=tol, start=start)
    v = q @ S
    value = float(np.linalg.norm(v))
    if value <= max(tol, SEPARABILITY_THRESHOLD):
        raise NonSeparableError(f"optimal margin {value:.3e} is not positive: data not separable")
    w = v / value
    achieved = float(np.min(S @ w))
    return MarginSolution(
        gamma_opt=value,
        q_star=q,
        w_opt=w,
        support=support_set(w, d, eps_sv),
        dual_gap=max(value - achieved, 0.0),
        dataset_id=d.fingerprint(),
    )


def support_set(w, d, eps=SUPPORT_EPS):
    """Indices ``i`` with ``s_i . w <= gamma(w) + eps`` (0-based)."""
    u = d.signed @ np.asarray(w, dtype=float)
    return tuple(int(i) for i in np.flatnonzero(u <= u.min() + eps))


def min_norm_subgradient(w, d, eps=1e-9, tol=DEFAULT_TOL):
    """Smallest tangential subgradient norm of the negative margin at unit ``w``.

    Minimizes ``||P(sum_{i in I(w)} q_i s_i)||`` over the face of the
    active indices, with ``P`` the projection onto the tangent space ``w^perp``.
    """
    w = np.asarray(w, dtype=float)
    S = d.signed[list(support_set(w, d, eps))]
    tangential = S - np.outer(S @ w, w)
    _, value, _ = min_norm_point(tangential, tol=tol)
    return value


@dataclass(frozen=True)
class KLCheck:
    lhs: float
    rhs: float
    holds: bool
    applicable: bool = True


def kl_check(w, d, sol, eps=1e-9):
    """Compare ``s(w)^2`` against ``gamma_opt * (gamma_opt - gamma(w))``.

    Points with negative margin are outside the inequality's hypothesis and
    come back with ``applicable=False`` (and ``holds=True``). The active set
    admits margins up to ``gamma(w) + eps``, so the comparison allows an
    extra ``gamma_opt * eps`` of slack.
    """
    g = hard_margin(w, d)
    slope = min_norm_subgradient(w, d, eps=eps)
    lhs = slope * slope
    rhs = sol.gamma_opt * (sol.gamma_opt - g)
    if g < 0.0:
        return KLCheck(lhs, rhs, True, applicable=False)
    return KLCheck(lhs, rhs, lhs >= rhs - CHECK_SLACK - sol.gamma_opt * eps)


@dataclass(frozen=True)
class InterlaceCheck:
    lower: float
    bias: float
    upper: float
    holds: bool


def interlace_bounds(deficit, gamma_opt, radius):
    """Lower and upper bias bounds implied by a margin deficit."""
    lower = deficit / radius
    upper = 2.0 * np.sqrt(max(deficit, 0.0) / gamma_opt)
    return lower, float(upper)


def interlace_check(w, d, sol):
    """``(gamma_opt - gamma(w))/R <= ||w - w_opt|| <= 2 sqrt((gamma_opt - gamma(w))/gamma_opt)``.

    The lower bound is checked unconditionally; the upper one only where
    ``gamma(w) >= 0``.
    """
    w = np.asarray(w, dtype=float)
    g = hard_margin(w, d)
    lower, upper = interlace_bounds(sol.gamma_opt - g, sol.gamma_opt, d.radius)
    bias = float(np.linalg.norm(w - sol.w_opt))
    holds = lower <= bias + CHECK_SLACK and (g < 0.0 or bias <= upper + CHECK_SLACK)
    return InterlaceCheck(lower, bias, upper, holds)
