"""Hot inner loops, compiled when possible.

The Cython extension ``_core`` is used if it imports; otherwise the
pure-Python ``_fallback`` is selected. Set ``MARGINLAB_PURE_PYTHON=1`` to
force the fallback. ``BACKEND`` names the active implementation.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("MARGINLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

# loop kinds understood by ascent_loop / dual_ascent_loop
CONSTANT = 0
ADAPTIVE = 1


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _fallback}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["cython"] = _core
    return found


def get_backend(name=None):
    if name is None:
        return _impl
    try:
        return backends()[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available") from None


def _mat(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _steps(rec):
    return np.ascontiguousarray(rec, dtype=np.intp)


def fw_simplex(G, start, tol, max_iter, backend=None):
    impl = get_backend(backend)
    return impl.fw_simplex(_mat(G), int(start), float(tol), int(max_iter))


def ascent_loop(S, beta, kind, eta, steps, rec, max_norm, backend=None):
    impl = get_backend(backend)
    return impl.ascent_loop(_mat(S), float(beta), int(kind), float(eta),
                            int(steps), _steps(rec), float(max_norm))


def rk4_loop(S, beta, dt, steps, rec, max_norm, backend=None):
    impl = get_backend(backend)
    return impl.rk4_loop(_mat(S), float(beta), float(dt), int(steps),
                         _steps(rec), float(max_norm))


def dual_ascent_loop(G, beta, kind, eta, steps, rec, max_norm, backend=None):
    impl = get_backend(backend)
    return impl.dual_ascent_loop(_mat(G), float(beta), int(kind), float(eta),
                                 int(steps), _steps(rec), float(max_norm))
