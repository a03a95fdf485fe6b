"""Decision sets, Euclidean projections and lattice delta-covers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import CoverTooLargeError, UnsupportedProjectionError

DEFAULT_MAX_CENTERS = 10**7

_CHUNK = 1 << 18


def project_simplex(v):
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-and-threshold: find the largest ``k`` such that the k-th largest
    entry stays positive after subtracting the common shift.
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    k = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[k] / (k + 1)
    return np.maximum(v - theta, 0.0)


class DecisionSet:
    """Closed convex decision set in R^d with known diameter."""

    kind = "abstract"
    dimension: int
    diameter: float

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError

    def project_many(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.array([self.project(p) for p in points]).reshape(points.shape)

    def bounding_box(self):
        raise NotImplementedError

    def sample(self, rng, n):
        """Draw ``n`` points of the set (uniformly where the kind allows it)."""
        raise NotImplementedError

    def _check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected a point of dimension {self.dimension}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("point has non-finite coordinates")
        return x


class Simplex(DecisionSet):
    kind = "simplex"

    def __init__(self, n):
        if n < 2:
            raise ValueError(f"simplex needs n >= 2, got {n}")
        self.n = int(n)
        self.dimension = self.n
        self.diameter = math.sqrt(2.0)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(x.shape == (self.n,) and np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)

    def project(self, x):
        return project_simplex(self._check_point(x))

    def bounding_box(self):
        return np.zeros(self.n), np.ones(self.n)

    def sample(self, rng, n):
        return rng.dirichlet(np.ones(self.n), size=n)

    def __repr__(self):
        return f"Simplex({self.n})"


class Box(DecisionSet):
    kind = "box"

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of the same length")
        if np.any(upper < lower):
            raise ValueError("upper bounds must be >= lower bounds")
        self.lower = lower
        self.upper = upper
        self.dimension = lower.size
        self.diameter = float(np.linalg.norm(upper - lower))
        if not self.diameter > 0:
            raise ValueError("box must have positive diameter")

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, x):
        return np.clip(self._check_point(x), self.lower, self.upper)

    def project_many(self, points):
        return np.clip(np.asarray(points, dtype=float), self.lower, self.upper)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def sample(self, rng, n):
        return rng.uniform(self.lower, self.upper, size=(n, self.dimension))

    @property
    def center(self):
        return (self.lower + self.upper) / 2.0

    def __repr__(self):
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


class Ball(DecisionSet):
    kind = "ball"

    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        if self.center.ndim != 1:
            raise ValueError("center must be a 1-d array")
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius!r}")
        self.radius = float(radius)
        self.dimension = self.center.size
        self.diameter = 2.0 * self.radius

    def contains(self, x, tol=1e-9):
        return bool(np.linalg.norm(np.asarray(x, dtype=float) - self.center) <= self.radius + tol)

    def project(self, x):
        x = self._check_point(x)
        offset = x - self.center
        dist = np.linalg.norm(offset)
        if dist <= self.radius:
            return x
        return self.center + offset * (self.radius / dist)

    def project_many(self, points):
        points = np.asarray(points, dtype=float)
        offset = points - self.center
        dist = np.linalg.norm(offset, axis=-1, keepdims=True)
        shrink = np.minimum(1.0, self.radius / np.maximum(dist, 1e-300))
        return self.center + offset * shrink

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def sample(self, rng, n):
        direction = rng.standard_normal((n, self.dimension))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / self.dimension)
        return self.center + direction * r[:, None]

    def __repr__(self):
        return f"Ball({self.center.tolist()}, {self.radius})"


class OracleSet(DecisionSet):
    """Set known only through a membership test and, optionally, a projector.

    Covers need ``bounds=(lower, upper)`` enclosing the set.
    """

    kind = "oracle"

    def __init__(self, dimension, diameter, membership: Callable, projector: Optional[Callable] = None, bounds=None):
        self.dimension = int(dimension)
        self.diameter = float(diameter)
        self.membership = membership
        self.projector = projector
        self.bounds = None if bounds is None else tuple(np.asarray(b, dtype=float) for b in bounds)

    def contains(self, x, tol=1e-9):
        return bool(self.membership(np.asarray(x, dtype=float)))

    def project(self, x):
        if self.projector is None:
            raise UnsupportedProjectionError("oracle set was built without a projection routine")
        return np.asarray(self.projector(self._check_point(x)), dtype=float)

    def bounding_box(self):
        if self.bounds is None:
            raise UnsupportedProjectionError("oracle set needs explicit bounds to build a cover")
        return self.bounds[0].copy(), self.bounds[1].copy()

    def sample(self, rng, n):
        lo, hi = self.bounding_box()
        out = []
        while len(out) < n:
            cand = rng.uniform(lo, hi, size=(4 * n, self.dimension))
            out.extend(c for c in cand if self.membership(c))
        return np.array(out[:n])


def project(decision_set, point):
    """Euclidean projection of ``point`` onto ``decision_set``."""
    return decision_set.project(point)


@dataclass(frozen=True, eq=False)
class Cover:
    centers: np.ndarray
    delta: float
    source_set: DecisionSet

    def __len__(self):
        return self.centers.shape[0]

    def nearest(self, x):
        """Index and distance of the center closest to ``x``."""
        d = np.linalg.norm(self.centers - np.asarray(x, dtype=float), axis=1)
        i = int(np.argmin(d))
        return i, float(d[i])

    def min_distances(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(points.shape[0])
        c_sq = np.einsum("ij,ij->i", self.centers, self.centers)
        for start in range(0, points.shape[0], 1024):
            block = points[start:start + 1024]
            sq = np.einsum("ij,ij->i", block, block)[:, None] - 2.0 * block @ self.centers.T + c_sq[None, :]
            out[start:start + 1024] = np.sqrt(np.maximum(sq.min(axis=1), 0.0))
        return out


def cover_size_bound(D, delta, d):
    """Covering-number bound ``(1 + 2D/delta)^d``."""
    if D <= 0 or delta <= 0 or d < 0:
        raise ValueError("D and delta must be positive, d nonnegative")
    return (1.0 + 2.0 * D / delta) ** d


def build_cover(decision_set, delta, max_centers=DEFAULT_MAX_CENTERS):
    """Lattice delta-cover of ``decision_set``.

    The bounding box is tiled by cubes of side ``delta / sqrt(d)`` (so each
    cube has half-diagonal ``delta / 2``). A cube is kept when its midpoint is
    within ``delta / 2`` of the set, and contributes the projection of its
    midpoint. Any point of the set lies in some cube, whose midpoint is then
    within ``delta / 2`` of it and whose representative is within ``delta``.

    Raises
    ------
    CoverTooLargeError
        The lattice would exceed ``max_centers`` cells.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    lo, hi = decision_set.bounding_box()
    d = lo.size
    spacing = delta / math.sqrt(d)
    counts = np.maximum(1, np.ceil((hi - lo) / spacing - 1e-9)).astype(np.int64)
    estimate = float(np.prod(counts.astype(float)))
    if estimate > max_centers:
        raise CoverTooLargeError(estimate, max_centers)
    axes = [lo[k] + (np.arange(counts[k]) + 0.5) * spacing for k in range(d)]
    half_diag = 0.5 * delta * (1.0 + 1e-9)
    total = int(estimate)
    kept = []
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        idx = np.unravel_index(flat, tuple(counts))
        mids = np.column_stack([axes[k][idx[k]] for k in range(d)])
        reps = decision_set.project_many(mids)
        near = np.linalg.norm(mids - reps, axis=1) <= half_diag
        kept.append(reps[near])
    centers = np.unique(np.concatenate(kept, axis=0), axis=0)
    return Cover(centers, float(delta), decision_set)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def parse_set(text):
    """Build a set from ``box:lo,..:hi,..``, ``ball:c,..:r`` or ``simplex:n``."""
    kind, _, rest = str(text).strip().partition(":")
    parts = rest.split(":") if rest else []
    kind = kind.lower()
    try:
        if kind == "box" and len(parts) == 2:
            return Box(_floats(parts[0]), _floats(parts[1]))
        if kind == "ball" and len(parts) == 2:
            return Ball(_floats(parts[0]), float(parts[1]))
        if kind == "simplex" and len(parts) == 1:
            return Simplex(int(parts[0]))
    except ValueError as exc:
        raise ValueError(f"bad set description {text!r}: {exc}") from exc
    raise ValueError(f"bad set description {text!r}; expected box:lo:hi, ball:center:radius or simplex:n")
