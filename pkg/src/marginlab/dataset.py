"""Separable binary datasets: construction, validation and CSV persistence.

Throughout the package the signed points are ``s_i = y_i * x_i`` and the
margin of ``w`` is ``min_i s_i . w``.
"""
import csv
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetFormatError, GenerationError

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled points ``features`` (n x m) with labels in {+1, -1}.

    Arrays are copied and made read-only. Construction does not enforce the
    unit-ball or label invariants; use :func:`validate` for that.
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, ndmin=2)
        y = np.array(self.labels, dtype=np.float64).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def m(self):
        return self.features.shape[1]

    @property
    def signed(self):
        """Signed points ``y_i x_i`` as an (n, m) array."""
        S = self.labels[:, None] * self.features
        S.setflags(write=False)
        return S

    @property
    def radius(self):
        """``R = max_i ||x_i||``."""
        return float(np.linalg.norm(self.features, axis=1).max())

    def fingerprint(self):
        """Stable identifier derived from the exact values (not the name)."""
        h = hashlib.sha256()
        h.update(f"{self.n}x{self.m}".encode())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        h.update(np.ascontiguousarray(self.features).tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels))

    def __hash__(self):
        return hash(self.fingerprint())


@dataclass(frozen=True)
class Violation:
    kind: str  # "norm", "label", "nonfinite", "shape"
    index: int
    magnitude: float


@dataclass(frozen=True)
class ValidationOutcome:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate(d):
    """Report every violated :class:`Dataset` invariant.

    Violations are returned as data; nothing is raised.
    """
    out = []
    if d.n < 1 or d.m < 1:
        out.append(Violation("shape", -1, float(d.n * d.m)))
    for i in range(d.n):
        x = d.features[i]
        if not np.all(np.isfinite(x)):
            out.append(Violation("nonfinite", i, math.nan))
            continue
        nrm = float(np.linalg.norm(x))
        if nrm > 1.0 + NORM_TOL:
            out.append(Violation("norm", i, nrm))
    for i, label in enumerate(d.labels):
        if label not in (1.0, -1.0):
            out.append(Violation("label", i, float(label)))
    return ValidationOutcome(tuple(out))


def canonical(name):
    """The fixed test datasets ``D1``, ``D2`` and ``D3``."""
    if name == "D1":
        return Dataset([[1.0, 0.0]], [1.0], name="D1")
    if name == "D2":
        return Dataset([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0], name="D2")
    if name == "D3":
        return Dataset([[0.6, 0.8], [0.6, -0.8]], [1.0, -1.0], name="D3")
    raise KeyError(f"unknown canonical dataset {name!r}")


CANONICAL = ("D1", "D2", "D3")


def generate_separable(n, m, target_margin, seed, max_attempts=None):
    """Sample ``n`` points in the unit ball of R^m separated by a random direction.

    A unit direction ``w*`` is drawn first; candidate points uniform in the
    ball are kept only if ``|x . w*| >= target_margin`` and are labeled by
    ``sign(x . w*)``, so the optimal margin is at least ``target_margin``.

    Raises
    ------
    ValueError
        If ``target_margin`` is not in (0, 1) or ``n``/``m`` are not positive.
    GenerationError
        If more than ``max_attempts`` candidates are drawn (default
        ``1000 * n + 10000``).
    """
    if not 0.0 < target_margin < 1.0:
        raise ValueError(f"target_margin must lie in (0, 1), got {target_margin}")
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if max_attempts is None:
        max_attempts = 1000 * n + 10000
    rng = np.random.default_rng(seed)
    w_star = rng.standard_normal(m)
    w_star /= np.linalg.norm(w_star)
    X = np.empty((n, m))
    y = np.empty(n)
    kept = attempts = 0
    batch = max(64, 4 * n)
    while kept < n:
        if attempts >= max_attempts:
            raise GenerationError(
                f"kept {kept}/{n} points after {attempts} draws; "
                f"target_margin={target_margin} is too large for m={m}")
        k = min(batch, max_attempts - attempts)
        z = rng.standard_normal((k, m))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        pts = z * rng.random(k)[:, None] ** (1.0 / m)
        proj = pts @ w_star
        attempts += k
        for p, a in zip(pts, proj):
            if abs(a) >= target_margin and kept < n:
                X[kept] = p
                y[kept] = 1.0 if a > 0 else -1.0
                kept += 1
    # guard against a norm of 1 + ulp from the radial scaling
    norms = np.linalg.norm(X, axis=1)
    X[norms > 1.0] /= norms[norms > 1.0, None]
    return Dataset(X, y, name=f"gen(n={n},m={m},margin={target_margin},seed={seed})")


def store_csv(d, path):
    """Write ``d`` with header ``y,x1,...,xm`` and 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["y"] + [f"x{k + 1}" for k in range(d.m)]) + "\n")
        for label, x in zip(d.labels, d.features):
            fh.write(",".join([f"{int(label):d}" if label in (1.0, -1.0) else f"{label:.17g}"]
                              + [f"{v:.17g}" for v in x]) + "\n")


def load_csv(path, name=None):
    """Read a dataset written by :func:`store_csv` (or any file in that format).

    Raises :class:`DatasetFormatError` carrying the 1-based line number on
    malformed headers, ragged rows, unparsable numbers, or labels outside
    {+1, -1}. Feature norms are *not* checked here; see :func:`validate`.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetFormatError("empty file", line=1)
    header = [h.strip() for h in rows[0]]
    m = len(header) - 1
    if m < 1 or header[0] != "y" or header[1:] != [f"x{k + 1}" for k in range(m)]:
        raise DatasetFormatError(f"expected header y,x1,...,xm; got {','.join(header)}", line=1)
    X, y = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != m + 1:
            raise DatasetFormatError(f"expected {m + 1} fields, got {len(row)}", line=lineno)
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise DatasetFormatError(str(exc), line=lineno) from None
        if vals[0] not in (1.0, -1.0):
            raise DatasetFormatError(f"label {row[0]!r} is not +1 or -1", line=lineno)
        y.append(vals[0])
        X.append(vals[1:])
    if not y:
        raise DatasetFormatError("no data rows", line=2)
    return Dataset(np.array(X), np.array(y), name=name if name is not None else str(path))
