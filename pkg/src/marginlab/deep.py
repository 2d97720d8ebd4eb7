"""Deep linear networks with Frobenius-normalized layers.

A network ``x -> x' W_1 ... W_L`` with ``W_l`` of shape ``(m_{l-1}, m_l)``
and ``m_L = 1`` lives on a product of spheres (one per layer). Its margin is
that of the end-to-end vector ``P(W) = W_1 ... W_L``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .margin import CHECK_SLACK, DEFAULT_TOL, min_norm_point, optimal_margin
from .optimizers import EPS_INT, Trajectory, _base_meta, geometric_steps
from .smooth import DEFAULT_PARAMS, softmin_stats

DEGENERATE_NORM = 1e-12
MAX_RESTARTS = 10


@dataclass(frozen=True)
class Architecture:
    widths: tuple

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        if len(widths) < 2 or min(widths) < 1:
            raise ValueError("need at least one layer of positive widths")
        if widths[-1] != 1:
            raise ValueError("the last width must be 1")
        object.__setattr__(self, "widths", widths)

    @classmethod
    def from_hidden(cls, m, hidden=()):
        return cls((m, *hidden, 1))

    @property
    def depth(self):
        return len(self.widths) - 1

    @property
    def shapes(self):
        return [(self.widths[l], self.widths[l + 1]) for l in range(self.depth)]


def _check_chain(W):
    for a, b in zip(W, W[1:]):
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"layer shapes {a.shape} and {b.shape} do not chain")
    if W[-1].shape[1] != 1:
        raise ValueError("last layer must have a single output column")


def as_params(layers):
    """Layers as a tuple of 2-d float arrays (vectors become columns)."""
    W = tuple(np.array(w, dtype=float).reshape(len(w), -1) for w in layers)
    _check_chain(W)
    return W


def random_params(arch, rng):
    """Standard normal layers, each scaled to unit Frobenius norm."""
    out = []
    for shape in arch.shapes:
        w = rng.standard_normal(shape)
        out.append(w / np.linalg.norm(w))
    return tuple(out)


def deep_product(W):
    W = as_params(W)
    P = W[0]
    for w in W[1:]:
        P = P @ w
    return P[:, 0]


def deep_margin(W, d):
    P = deep_product(W)
    if P.shape[0] != d.m:
        raise ValueError(f"network input width {P.shape[0]} != data dimension {d.m}")
    return float(np.min(d.signed @ P))


def _prefixes(W):
    # U[l] = W_1 ... W_l, with U[0] the identity on R^m
    U = [np.eye(W[0].shape[0])]
    for w in W:
        U.append(U[-1] @ w)
    return U


def _suffixes(W):
    # V[l] = W_{l+1} ... W_L (0-based layers), with V[L] = [[1]]
    V = [np.ones((1, 1))]
    for w in reversed(W):
        V.append(w @ V[-1])
    return V[::-1]


def _grads_from_vector(W, v):
    U, V = _prefixes(W), _suffixes(W)
    return [np.outer(U[l].T @ v, V[l + 1][:, 0]) for l in range(len(W))]


def layer_gradients(W, q, d):
    """Per-layer gradients of ``sum_i q_i s_i' W_1 ... W_L``."""
    W = as_params(W)
    return _grads_from_vector(W, np.asarray(q, dtype=float) @ d.signed)


def tangent_project(W, G):
    """Project each ``G_l`` onto the tangent space of its layer's sphere."""
    return [g - np.vdot(g, w) * w for g, w in zip(G, as_params(W))]


def trace_identity_residual(W, d):
    """``max_{l,i} |<grad_l f_i, W_l>_F - f_i(W)|``."""
    W = as_params(W)
    S = d.signed
    U, V = _prefixes(W), _suffixes(W)
    f = S @ U[-1][:, 0]
    worst = 0.0
    for l, w in enumerate(W):
        inner = (S @ U[l]) @ w @ V[l + 1][:, 0]
        worst = max(worst, float(np.max(np.abs(inner - f))))
    return worst


@dataclass(frozen=True)
class DeepCheck:
    lhs: float
    rhs: float
    holds: bool
    applicable: bool = True


def deep_subgradient_check(W, d, eps=1e-9, sol=None, tol=DEFAULT_TOL):
    """Slope-squared versus ``L * gamma_opt * (gamma_opt - gamma(W))``.

    The left side is the smallest squared norm of a Riemannian subgradient
    built from a convex combination over the active samples. Samples within
    ``eps`` of the minimum count as active; such a combination belongs to a
    function that may sit ``eps`` above ``gamma(W)``, hence the extra
    ``L * gamma_opt * eps`` of slack in ``holds``.
    """
    W = as_params(W)
    sol = sol or optimal_margin(d)
    S = d.signed
    U, V = _prefixes(W), _suffixes(W)
    u = S @ U[-1][:, 0]
    g = float(u.min())
    L = len(W)
    rhs = L * sol.gamma_opt * (sol.gamma_opt - g)
    active = np.flatnonzero(u <= g + eps)
    blocks = []
    for i in active:
        parts = []
        for l, w in enumerate(W):
            grad = np.outer(U[l].T @ S[i], V[l + 1][:, 0])
            parts.append((grad - np.vdot(grad, w) * w).ravel())
        blocks.append(np.concatenate(parts))
    _, value, _ = min_norm_point(np.array(blocks), tol=tol)
    lhs = value * value
    if g < 0.0:
        return DeepCheck(lhs, rhs, True, applicable=False)
    return DeepCheck(lhs, rhs, lhs >= rhs - CHECK_SLACK - L * sol.gamma_opt * eps)


def _ascent(d, arch, beta, steps, eta, rng, rec, sol, callback):
    S = d.signed
    W = list(random_params(arch, rng))
    rows, extra = [], []
    trace_worst = 0.0
    r = 0
    for t in range(steps + 1):
        U = _prefixes(W)
        P = U[-1][:, 0]
        nrm = float(np.linalg.norm(P))
        if not np.isfinite(nrm):
            raise NumericalError(f"deep ascent became non-finite at step {t}")
        if nrm < DEGENERATE_NORM:
            return None
        u = S @ P
        R, q = softmin_stats(u, beta)
        V = _suffixes(W)
        v = q @ S
        grads = [np.outer(U[l].T @ v, V[l + 1][:, 0]) for l in range(len(W))]
        tang = [g - np.vdot(g, w) * w for g, w in zip(grads, W)]
        trace_worst = max(trace_worst, trace_identity_residual(W, d))
        if r < len(rec) and rec[r] == t:
            marg = float(u.min())
            rows.append((t, nrm, marg, R, float(np.sqrt(sum(np.vdot(x, x) for x in tang))),
                         float(np.linalg.norm(P / nrm - sol.w_opt)), sol.gamma_opt - marg))
            extra.append(float(np.linalg.norm(P - sol.w_opt)))
            if callback is not None:
                callback(t, tuple(w.copy() for w in W))
            r += 1
        if t == steps:
            break
        for l in range(len(W)):
            w = W[l] + eta * tang[l]
            W[l] = w / np.linalg.norm(w)
    return rows, extra, trace_worst, tuple(W)


def riemannian_ascent(d, arch, p=None, steps=5000, eta=0.1, seed=0, sol=None,
                      record_at=None, callback=None):
    """Projected ascent of ``R_beta(P(W))`` on the product of spheres.

    Each step moves every layer along its tangent-projected gradient and
    renormalizes it. A degenerate end-to-end product triggers a restart from
    a fresh seed (``seed + 1``, ...); restarts are counted in ``meta``.
    ``callback(step, layers)`` is called at every recorded step.
    """
    p = p or DEFAULT_PARAMS
    sol = sol or optimal_margin(d)
    if arch.widths[0] != d.m:
        raise ValueError(f"architecture input width {arch.widths[0]} != data dimension {d.m}")
    if steps < 1 or not eta > 0:
        raise ValueError("steps must be >= 1 and eta > 0")
    rec = geometric_steps(1, steps) if record_at is None else np.unique(
        np.clip(np.asarray(record_at, dtype=np.int64), 0, steps))
    for restart in range(MAX_RESTARTS + 1):
        out = _ascent(d, arch, p.beta, steps, eta, np.random.default_rng(seed + restart),
                      rec, sol, callback)
        if out is not None:
            break
    else:
        raise NumericalError(f"end-to-end product degenerate after {MAX_RESTARTS} restarts")
    rows, extra, trace_worst, _ = out
    cols = np.array(rows, dtype=float).reshape(-1, 7)
    meta = _base_meta(d, p, sol, "deep")
    meta.update(widths=list(arch.widths), depth=arch.depth, steps=int(steps), eta=float(eta),
                seed=int(seed), restarts=restart, trace_identity_max=trace_worst,
                eps_int=EPS_INT)
    return Trajectory(*cols.T, extra={"product_dist": extra}, meta=meta)
