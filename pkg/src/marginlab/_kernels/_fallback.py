"""Pure-Python twins of the compiled loops in ``_core.pyx``."""
import math

import numpy as np


def _softmin(u, beta):
    umin = u.min()
    e = np.exp(-beta * (u - umin))
    z = e.sum()
    return umin - math.log(z / u.shape[0]) / beta, e / z


def _primal_grad(S, w, beta):
    r, q = _softmin(S @ w, beta)
    return r, q @ S


def fw_simplex(G, start, tol, max_iter):
    n = G.shape[0]
    q = np.zeros(n)
    q[start] = 1.0
    Gq = np.array(G[:, start], dtype=np.float64)
    f = float(G[start, start])
    it = 0
    while True:
        i = int(np.argmin(Gq))
        lo = Gq[i]
        fw_gap = 2.0 * (f - lo)
        if fw_gap <= tol or it >= max_iter:
            break
        j = int(np.argmax(np.where(q > 0.0, Gq, -np.inf)))
        hi = Gq[j]
        away_gap = 2.0 * (hi - f)
        if fw_gap >= away_gap:
            den = G[i, i] - 2.0 * lo + f
            gamma = min((f - lo) / den, 1.0) if den > 0.0 else 1.0
            q *= 1.0 - gamma
            Gq = (1.0 - gamma) * Gq + gamma * G[:, i]
            q[i] += gamma
        else:
            gmax = q[j] / (1.0 - q[j])
            den = f - 2.0 * hi + G[j, j]
            gamma = (hi - f) / den if den > 0.0 else gmax
            gamma = min(gamma, gmax)
            q *= 1.0 + gamma
            Gq = (1.0 + gamma) * Gq - gamma * G[:, j]
            q[j] -= gamma
            if gamma == gmax:
                q[j] = 0.0
        it += 1
        if it % 64 == 0:
            np.maximum(q, 0.0, out=q)
            q /= q.sum()
            Gq = G @ q
        f = float(q @ Gq)
    return q, max(fw_gap, 0.0), it


def ascent_loop(S, beta, kind, eta, steps, rec, max_norm):
    m = S.shape[1]
    w = np.zeros(m)
    out = np.zeros((len(rec), m))
    r, status, fail = 0, 0, -1
    r_prev, max_drop = 0.0, -math.inf
    for t in range(steps + 1):
        R, g = _primal_grad(S, w, beta)
        if not math.isfinite(R):
            status, fail = 1, t
            break
        if t > 0:
            max_drop = max(max_drop, r_prev - R)
        r_prev = R
        if t == steps:
            break
        step = eta if kind == 0 else eta / math.sqrt(t + 1.0)
        w += step * g
        nrm = float(w @ w)
        if not math.isfinite(nrm) or nrm > max_norm * max_norm:
            status, fail = 1, t + 1
            break
        if r < len(rec) and rec[r] == t + 1:
            out[r] = w
            r += 1
    return out, status, fail, max_drop


def rk4_loop(S, beta, dt, steps, rec, max_norm):
    m = S.shape[1]
    w = np.zeros(m)
    out = np.zeros((len(rec), m))
    r, status, fail = 0, 0, -1
    r_prev, max_drop = 0.0, -math.inf
    for t in range(steps + 1):
        R, k1 = _primal_grad(S, w, beta)
        if not math.isfinite(R):
            status, fail = 1, t
            break
        if t > 0:
            max_drop = max(max_drop, r_prev - R)
        r_prev = R
        if t == steps:
            break
        _, k2 = _primal_grad(S, w + 0.5 * dt * k1, beta)
        _, k3 = _primal_grad(S, w + 0.5 * dt * k2, beta)
        _, k4 = _primal_grad(S, w + dt * k3, beta)
        w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        nrm = float(w @ w)
        if not math.isfinite(nrm) or nrm > max_norm * max_norm:
            status, fail = 1, t + 1
            break
        if r < len(rec) and rec[r] == t + 1:
            out[r] = w
            r += 1
    return out, status, fail, max_drop


def dual_ascent_loop(G, beta, kind, eta, steps, rec, max_norm):
    n = G.shape[0]
    c = np.zeros(n)
    out = np.zeros((len(rec), n))
    r, status, fail = 0, 0, -1
    r_prev, max_drop = 0.0, -math.inf
    for t in range(steps + 1):
        u = G @ c
        nrm2 = float(c @ u)
        R, q = _softmin(u, beta)
        if not math.isfinite(R) or nrm2 > max_norm * max_norm:
            status, fail = 1, t
            break
        if t > 0:
            max_drop = max(max_drop, r_prev - R)
        r_prev = R
        if t == steps:
            break
        step = eta if kind == 0 else eta / math.sqrt(t + 1.0)
        c += step * q
        if r < len(rec) and rec[r] == t + 1:
            out[r] = c
            r += 1
    return out, status, fail, max_drop
