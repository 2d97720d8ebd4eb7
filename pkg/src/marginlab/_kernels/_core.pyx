# cython: language_level=3
"""Compiled inner loops.

Every function here has a line-for-line twin in ``_fallback.py``; the two
must stay in sync (``tests/test_kernels.py`` compares them).
"""
import numpy as np

from libc.math cimport exp, log, sqrt, isfinite, INFINITY


cdef double _softmin(const double[::1] u, double beta, double[::1] q) noexcept nogil:
    # Boltzmann weights into q; returns the smoothed margin.
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double umin = u[0]
    cdef double z = 0.0
    for i in range(1, n):
        if u[i] < umin:
            umin = u[i]
    for i in range(n):
        q[i] = exp(-beta * (u[i] - umin))
        z += q[i]
    for i in range(n):
        q[i] /= z
    return umin - log(z / n) / beta


cdef double _primal_grad(const double[:, ::1] S, const double[::1] w, double beta,
                         double[::1] u, double[::1] q, double[::1] g) noexcept nogil:
    # g = sum_i qhat_i s_i at w; returns the smoothed margin at w.
    cdef Py_ssize_t i, k, n = S.shape[0], m = S.shape[1]
    cdef double acc, r
    for i in range(n):
        acc = 0.0
        for k in range(m):
            acc += S[i, k] * w[k]
        u[i] = acc
    r = _softmin(u, beta, q)
    for k in range(m):
        g[k] = 0.0
    for i in range(n):
        for k in range(m):
            g[k] += q[i] * S[i, k]
    return r


def fw_simplex(const double[:, ::1] G, Py_ssize_t start, double tol, Py_ssize_t max_iter):
    """Away-step Frank-Wolfe for min q'Gq over the simplex.

    Returns ``(q, gap, iterations)`` where ``gap`` is the Frank-Wolfe gap
    of the returned point.
    """
    cdef Py_ssize_t n = G.shape[0]
    cdef Py_ssize_t i, j, k, it = 0
    q_arr = np.zeros(n)
    Gq_arr = np.array(G[:, start], dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double[::1] Gq = Gq_arr
    cdef double f, fw_gap, away_gap, num, den, gamma, gmax, lo, hi, s
    q[start] = 1.0
    f = G[start, start]
    with nogil:
        while True:
            i = 0
            lo = Gq[0]
            for k in range(1, n):
                if Gq[k] < lo:
                    lo = Gq[k]
                    i = k
            fw_gap = 2.0 * (f - lo)
            if fw_gap <= tol or it >= max_iter:
                break
            j = -1
            hi = -INFINITY
            for k in range(n):
                if q[k] > 0.0 and Gq[k] > hi:
                    hi = Gq[k]
                    j = k
            away_gap = 2.0 * (hi - f)
            if fw_gap >= away_gap:
                num = f - lo
                den = G[i, i] - 2.0 * lo + f
                gamma = num / den if den > 0.0 else 1.0
                if gamma > 1.0:
                    gamma = 1.0
                for k in range(n):
                    q[k] *= 1.0 - gamma
                    Gq[k] = (1.0 - gamma) * Gq[k] + gamma * G[k, i]
                q[i] += gamma
            else:
                gmax = q[j] / (1.0 - q[j])
                num = hi - f
                den = f - 2.0 * hi + G[j, j]
                gamma = num / den if den > 0.0 else gmax
                if gamma >= gmax:
                    gamma = gmax
                for k in range(n):
                    q[k] *= 1.0 + gamma
                    Gq[k] = (1.0 + gamma) * Gq[k] - gamma * G[k, j]
                q[j] -= gamma
                if gamma == gmax:
                    q[j] = 0.0
            it += 1
            if it % 64 == 0:
                # resync against drift
                s = 0.0
                for k in range(n):
                    if q[k] < 0.0:
                        q[k] = 0.0
                    s += q[k]
                for k in range(n):
                    q[k] /= s
                for k in range(n):
                    Gq[k] = 0.0
                    for j in range(n):
                        Gq[k] += G[k, j] * q[j]
            f = 0.0
            for k in range(n):
                f += q[k] * Gq[k]
    return q_arr, max(fw_gap, 0.0), it


def ascent_loop(const double[:, ::1] S, double beta, int kind, double eta,
                Py_ssize_t steps, const Py_ssize_t[::1] rec, double max_norm):
    """Explicit steps w <- w + eta_t * grad R(w) from w = 0.

    ``kind`` 0 uses eta_t = eta, 1 uses eta_t = eta / sqrt(t + 1).
    Returns ``(W_rec, status, fail_step, max_drop)``; status 1 means the
    divergence guard tripped at ``fail_step``.
    """
    cdef Py_ssize_t n = S.shape[0], m = S.shape[1]
    cdef Py_ssize_t t, k, r = 0, nrec = rec.shape[0], fail = -1
    cdef int status = 0
    cdef double R, R_prev = 0.0, drop, max_drop = -INFINITY, step, nrm
    w_arr = np.zeros(m)
    out = np.zeros((nrec, m))
    cdef double[::1] w = w_arr
    cdef double[::1] u = np.empty(n)
    cdef double[::1] q = np.empty(n)
    cdef double[::1] g = np.empty(m)
    cdef double[:, ::1] o = out
    with nogil:
        for t in range(steps + 1):
            R = _primal_grad(S, w, beta, u, q, g)
            if not isfinite(R):
                status = 1
                fail = t
                break
            if t > 0:
                drop = R_prev - R
                if drop > max_drop:
                    max_drop = drop
            R_prev = R
            if t == steps:
                break
            step = eta if kind == 0 else eta / sqrt(t + 1.0)
            nrm = 0.0
            for k in range(m):
                w[k] += step * g[k]
                nrm += w[k] * w[k]
            if not isfinite(nrm) or nrm > max_norm * max_norm:
                status = 1
                fail = t + 1
                break
            if r < nrec and rec[r] == t + 1:
                for k in range(m):
                    o[r, k] = w[k]
                r += 1
    return out, status, fail, max_drop


def rk4_loop(const double[:, ::1] S, double beta, double dt, Py_ssize_t steps,
             const Py_ssize_t[::1] rec, double max_norm):
    """Classical RK4 on dw/dt = grad R(w), w(0) = 0, fixed step ``dt``.

    Same return convention as :func:`ascent_loop`.
    """
    cdef Py_ssize_t n = S.shape[0], m = S.shape[1]
    cdef Py_ssize_t t, k, r = 0, nrec = rec.shape[0], fail = -1
    cdef int status = 0
    cdef double R, R_prev = 0.0, drop, max_drop = -INFINITY, nrm
    out = np.zeros((nrec, m))
    cdef double[::1] w = np.zeros(m)
    cdef double[::1] tmp = np.empty(m)
    cdef double[::1] k1 = np.empty(m)
    cdef double[::1] k2 = np.empty(m)
    cdef double[::1] k3 = np.empty(m)
    cdef double[::1] k4 = np.empty(m)
    cdef double[::1] u = np.empty(n)
    cdef double[::1] q = np.empty(n)
    cdef double[:, ::1] o = out
    with nogil:
        for t in range(steps + 1):
            R = _primal_grad(S, w, beta, u, q, k1)
            if not isfinite(R):
                status = 1
                fail = t
                break
            if t > 0:
                drop = R_prev - R
                if drop > max_drop:
                    max_drop = drop
            R_prev = R
            if t == steps:
                break
            for k in range(m):
                tmp[k] = w[k] + 0.5 * dt * k1[k]
            _primal_grad(S, tmp, beta, u, q, k2)
            for k in range(m):
                tmp[k] = w[k] + 0.5 * dt * k2[k]
            _primal_grad(S, tmp, beta, u, q, k3)
            for k in range(m):
                tmp[k] = w[k] + dt * k3[k]
            _primal_grad(S, tmp, beta, u, q, k4)
            nrm = 0.0
            for k in range(m):
                w[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                nrm += w[k] * w[k]
            if not isfinite(nrm) or nrm > max_norm * max_norm:
                status = 1
                fail = t + 1
                break
            if r < nrec and rec[r] == t + 1:
                for k in range(m):
                    o[r, k] = w[k]
                r += 1
    return out, status, fail, max_drop


def dual_ascent_loop(const double[:, ::1] G, double beta, int kind, double eta,
                     Py_ssize_t steps, const Py_ssize_t[::1] rec, double max_norm):
    """Coefficient-space ascent c <- c + eta_t * qhat(Gc) from c = 0.

    With G the signed Gram matrix this is functional gradient ascent in
    the RKHS. Same return convention as :func:`ascent_loop`.
    """
    cdef Py_ssize_t n = G.shape[0]
    cdef Py_ssize_t t, i, k, r = 0, nrec = rec.shape[0], fail = -1
    cdef int status = 0
    cdef double R, R_prev = 0.0, drop, max_drop = -INFINITY, step, acc, nrm2
    out = np.zeros((nrec, n))
    cdef double[::1] c = np.zeros(n)
    cdef double[::1] u = np.empty(n)
    cdef double[::1] q = np.empty(n)
    cdef double[:, ::1] o = out
    with nogil:
        for t in range(steps + 1):
            nrm2 = 0.0
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc += G[i, k] * c[k]
                u[i] = acc
                nrm2 += c[i] * acc
            R = _softmin(u, beta, q)
            if not isfinite(R) or nrm2 > max_norm * max_norm:
                status = 1
                fail = t
                break
            if t > 0:
                drop = R_prev - R
                if drop > max_drop:
                    max_drop = drop
            R_prev = R
            if t == steps:
                break
            step = eta if kind == 0 else eta / sqrt(t + 1.0)
            for i in range(n):
                c[i] += step * q[i]
            if r < nrec and rec[r] == t + 1:
                for i in range(n):
                    o[r, i] = c[i]
                r += 1
    return out, status, fail, max_drop
