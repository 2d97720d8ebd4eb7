"""Independent reference computations used by the tests."""
import numpy as np


def simplex_grid(n, step=1e-3):
    """All points of the simplex in R^n on a grid of spacing ``step`` (n <= 3)."""
    k = int(round(1.0 / step))
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        a = np.arange(k + 1) / k
        return np.column_stack([a, 1.0 - a])
    if n == 3:
        i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
        keep = i + j <= k
        a, b = i[keep] / k, j[keep] / k
        return np.column_stack([a, b, 1.0 - a - b])
    raise ValueError("grid oracle supports n <= 3")


def grid_min_norm(points, step=1e-3):
    """Brute-force ``min_q ||q' points||`` over the simplex grid."""
    Q = simplex_grid(len(points), step)
    return float(np.min(np.linalg.norm(Q @ np.asarray(points, dtype=float), axis=1)))


def random_simplex(rng, n):
    return rng.dirichlet(np.ones(n))


def random_unit(rng, m):
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


def central_difference(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def sphere_product_slope(f, W, h=1e-6):
    """Riemannian gradient norm of ``f`` on a product of spheres by finite differences.

    Each layer is perturbed along an orthonormal basis of its tangent space
    and mapped back by renormalization.
    """
    W = [np.array(w, dtype=float) for w in W]
    total = 0.0
    for l, w in enumerate(W):
        flat = w.ravel()
        # tangent basis: complete flat/|flat| to an orthonormal basis
        Q, _ = np.linalg.qr(np.column_stack([flat, np.eye(flat.size)]))
        for k in range(1, flat.size):
            e = Q[:, k].reshape(w.shape)
            vals = []
            for sgn in (1.0, -1.0):
                V = list(W)
                v = w + sgn * h * e
                V[l] = v / np.linalg.norm(v)
                vals.append(f(V))
            total += ((vals[0] - vals[1]) / (2.0 * h)) ** 2
    return float(np.sqrt(total))
