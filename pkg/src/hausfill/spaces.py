"""Concrete metric spaces, the level nets ``Y_n`` with their parent partition,
and the 1-Lipschitz connector paths between parents and children.

Point conventions: every space works with 2-D float arrays ``(n, dim)``.  The
circle and the polyline use their arc-length parameter as the single
coordinate; the Cantor ultrametric uses integer digit rows ``(n, depth)``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import BudgetExceeded, InvalidInput, ResolutionExceeded

ATOL = 1e-12
MAX_NET_POINTS = 1 << 22
MAX_SAMPLE_POINTS = 1 << 24


def _rows(points, dim):
    a = np.asarray(points, dtype=np.float64)
    if a.ndim == 0:
        return a.reshape(1, 1)
    if a.ndim == 1:
        return a.reshape(-1, 1) if dim == 1 else a.reshape(1, -1)
    return a


def _check_sample_size(count, level):
    if count > MAX_SAMPLE_POINTS:
        raise ResolutionExceeded(f"validation level {level} needs {count} sample points")


def _hier_grid_1d(level):
    """Dyadic grid points of [0, 1] in coarse-to-fine order: 0, 1, 1/2, 1/4, 3/4, ..."""
    out = [0.0, 1.0]
    for j in range(1, level + 1):
        out.extend(np.arange(1, 1 << j, 2) / float(1 << j))
    return np.asarray(out)


class Space:
    """Common surface of the built-in spaces."""

    kind = "abstract"
    is_length_space = False
    dim = 1

    def distance(self, a, b):
        raise NotImplementedError

    def pairwise(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        return np.stack([self.distance(a, np.broadcast_to(row, a.shape)) for row in b], axis=1)

    def as_points(self, points):
        return _rows(points, self.dim)

    def nearest(self, points, targets, tol=ATOL):
        """Nearest target per point, ties to the lowest target index."""
        d = self.pairwise(points, targets)
        best = d.min(axis=1)
        idx = np.argmax(d <= (best + tol)[:, None], axis=1)
        return idx, d[np.arange(d.shape[0]), idx]

    def nearest_distance(self, points, targets):
        return self.nearest(points, targets)[1]

    def normalized(self):
        return self

    def describe(self):
        return {"kind": self.kind}

    # length-space interface -------------------------------------------------

    def net_level(self, n):
        raise InvalidInput(f"{self.kind} is not a length space; it cannot be a target")

    def geodesic_length(self, p, q):
        raise InvalidInput(f"{self.kind} is not a length space")

    def path_eval(self, p, q, s):
        raise InvalidInput(f"{self.kind} is not a length space")


# ------------------------------------------------------------------ cubes


class EuclideanCube(Space):
    kind = "euclidean-cube"
    is_length_space = True

    def __init__(self, dim=1, side=1.0):
        if dim < 1:
            raise InvalidInput("cube dimension must be >= 1")
        if not side > 0:
            raise InvalidInput("cube side must be positive")
        self.dim = int(dim)
        self.side = float(side)

    def __repr__(self):
        return f"EuclideanCube(dim={self.dim}, side={self.side})"

    def __eq__(self, other):
        return type(other) is type(self) and (self.dim, self.side) == (other.dim, other.side)

    def __hash__(self):
        return hash((self.kind, self.dim, self.side))

    @property
    def diameter(self):
        return self.side * math.sqrt(self.dim)

    def normalized(self):
        return EuclideanCube(self.dim, self.side / max(self.diameter, 1.0))

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "side": self.side}

    def distance(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        return np.sqrt(np.sum((a - b) ** 2, axis=-1))

    def pairwise(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))

    def nearest(self, points, targets, tol=ATOL):
        return kernels.nearest(self.as_points(points), self.as_points(targets), tol)

    def nearest_distance(self, points, targets):
        tree = cKDTree(self.as_points(targets))
        d, _ = tree.query(self.as_points(points))
        return d

    def contains(self, points, margin=0.0):
        p = self.as_points(points)
        return ((p >= margin - ATOL) & (p <= self.side - margin + ATOL)).all(axis=1)

    def cell_diameter(self, level, base):
        return self.side * math.sqrt(self.dim) * float(base) ** (-level)

    def euclid_radius(self, radius):
        """Euclidean radius of a metric ball of the given radius."""
        return radius

    def sample(self, level):
        """Corner-first hierarchical grid: all level-0 vertices, then each finer
        dyadic level's new vertices, each block in lexicographic order."""
        seen = set()
        out = []
        for j in range(level + 1):
            axis = np.arange((1 << j) + 1) / float(1 << j) * self.side
            grid = np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"), -1).reshape(-1, self.dim)
            for row in grid:
                key = tuple(row)
                if key not in seen:
                    seen.add(key)
                    out.append(row)
        return np.asarray(out)

    def validation_sample(self, level):
        """Vertex grid with ``2**level`` intervals per side and its covering radius."""
        _check_sample_size(((1 << level) + 1) ** self.dim, level)
        axis = np.arange((1 << level) + 1) / float(1 << level) * self.side
        grid = np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"), -1).reshape(-1, self.dim)
        return grid, self.side * math.sqrt(self.dim) / float(1 << (level + 1))

    def net_level(self, n):
        # cell-centre grid with covering radius side*sqrt(dim)/(2m) <= 2**-n
        m = max(1, math.ceil(self.side * math.sqrt(self.dim) * 2.0 ** (n - 1) - 1e-9))
        if m ** self.dim > MAX_NET_POINTS:
            raise ResolutionExceeded(f"net level {n} needs {m}**{self.dim} points")
        axis = (np.arange(m) + 0.5) / m * self.side
        pts = np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"), -1).reshape(-1, self.dim)
        return pts

    def geodesic_length(self, p, q):
        return self.distance(p, q)

    def path_eval(self, p, q, s):
        p = self.as_points(p)
        q = self.as_points(q)
        s = np.asarray(s, dtype=np.float64).reshape(-1)
        length = self.distance(p, q)
        frac = np.where(length > 0, np.minimum(s, length) / np.where(length > 0, length, 1.0), 1.0)
        out = p + (q - p) * frac[:, None]
        # land exactly on the endpoint once the geodesic is used up
        return np.where((s >= length)[:, None], q, out)


class SnowflakeCube(EuclideanCube):
    """The cube with metric ``|x - y|**alpha``; a domain only, never a target."""

    kind = "snowflake-cube"
    is_length_space = False

    def __init__(self, dim=1, alpha=0.5, side=1.0):
        super().__init__(dim, side)
        if not 0 < alpha < 1:
            raise InvalidInput("snowflake exponent must lie in (0, 1)")
        self.alpha = float(alpha)

    def __repr__(self):
        return f"SnowflakeCube(dim={self.dim}, alpha={self.alpha}, side={self.side})"

    def __eq__(self, other):
        return type(other) is type(self) and (self.dim, self.side, self.alpha) == (
            other.dim, other.side, other.alpha)

    def __hash__(self):
        return hash((self.kind, self.dim, self.side, self.alpha))

    @property
    def diameter(self):
        return (self.side * math.sqrt(self.dim)) ** self.alpha

    def normalized(self):
        scale = (self.side * math.sqrt(self.dim))
        if self.diameter <= 1.0:
            return self
        return SnowflakeCube(self.dim, self.alpha, self.side / scale)

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "side": self.side, "alpha": self.alpha}

    def distance(self, a, b):
        return super().distance(a, b) ** self.alpha

    def pairwise(self, a, b):
        return super().pairwise(a, b) ** self.alpha

    def nearest(self, points, targets, tol=ATOL):
        idx, d = super().nearest(points, targets, tol)
        return idx, d ** self.alpha

    def nearest_distance(self, points, targets):
        return super().nearest_distance(points, targets) ** self.alpha

    def cell_diameter(self, level, base):
        return super().cell_diameter(level, base) ** self.alpha

    def euclid_radius(self, radius):
        return radius ** (1.0 / self.alpha)

    def validation_sample(self, level):
        pts, res = super().validation_sample(level)
        return pts, res ** self.alpha

    def net_level(self, n):
        return Space.net_level(self, n)

    def geodesic_length(self, p, q):
        return Space.geodesic_length(self, p, q)

    def path_eval(self, p, q, s):
        return Space.path_eval(self, p, q, s)


# --------------------------------------------------------- 1-D length spaces


class Circle(Space):
    """Circle with its path metric, points given by arc parameter in [0, c)."""

    kind = "circle"
    is_length_space = True
    dim = 1

    def __init__(self, circumference=1.0):
        if not circumference > 0:
            raise InvalidInput("circumference must be positive")
        self.circumference = float(circumference)

    def __repr__(self):
        return f"Circle(circumference={self.circumference})"

    def __eq__(self, other):
        return type(other) is type(self) and self.circumference == other.circumference

    def __hash__(self):
        return hash((self.kind, self.circumference))

    @property
    def diameter(self):
        return self.circumference / 2.0

    def describe(self):
        return {"kind": self.kind, "circumference": self.circumference}

    def _wrap(self, s):
        return np.mod(s, self.circumference)

    def distance(self, a, b):
        a = self.as_points(a)[:, 0]
        b = self.as_points(b)[:, 0]
        d = np.abs(self._wrap(a - b))
        return np.minimum(d, self.circumference - d)

    def pairwise(self, a, b):
        a = self.as_points(a)[:, 0]
        b = self.as_points(b)[:, 0]
        d = np.abs(self._wrap(a[:, None] - b[None, :]))
        return np.minimum(d, self.circumference - d)

    def contains(self, points, margin=0.0):
        p = self.as_points(points)[:, 0]
        return (p >= 0) & (p < self.circumference)

    def embed(self, points):
        th = 2 * math.pi * self.as_points(points)[:, 0] / self.circumference
        r = self.circumference / (2 * math.pi)
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)

    def sample(self, level):
        g = _hier_grid_1d(level)
        return (g[g < 1.0] * self.circumference).reshape(-1, 1)

    def validation_sample(self, level):
        m = 1 << level
        _check_sample_size(m, level)
        return (np.arange(m) / m * self.circumference).reshape(-1, 1), self.circumference / (2 * m)

    def net_level(self, n):
        m = max(1, math.ceil(self.circumference * 2.0 ** n - 1e-9))
        if m > MAX_NET_POINTS:
            raise ResolutionExceeded(f"net level {n} needs {m} points")
        return (np.arange(m) / m * self.circumference).reshape(-1, 1)

    def geodesic_length(self, p, q):
        return self.distance(p, q)

    def path_eval(self, p, q, s):
        p = self.as_points(p)[:, 0]
        q = self.as_points(q)[:, 0]
        s = np.asarray(s, dtype=np.float64).reshape(-1)
        c = self.circumference
        delta = self._wrap(q - p + c / 2) - c / 2
        length = np.abs(delta)
        out = self._wrap(p + np.sign(delta) * np.minimum(s, length))
        done = s >= length
        out = np.where(done, np.broadcast_to(q, out.shape), out)
        return out.reshape(-1, 1)


class Polyline(Space):
    """An embedded polygonal arc with its intrinsic (arc-length) metric."""

    kind = "length-space"
    is_length_space = True
    dim = 1

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2:
            raise InvalidInput("polyline needs at least two vertices")
        self.vertices = v
        seg = np.sqrt(((v[1:] - v[:-1]) ** 2).sum(axis=1))
        if (seg <= 0).any():
            raise InvalidInput("polyline has a degenerate segment")
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self._cum[-1])

    def __repr__(self):
        return f"Polyline(vertices={self.vertices.tolist()})"

    def __eq__(self, other):
        return type(other) is type(self) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash((self.kind, self.vertices.tobytes()))

    @property
    def diameter(self):
        return self.length

    def describe(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist()}

    def distance(self, a, b):
        return np.abs(self.as_points(a)[:, 0] - self.as_points(b)[:, 0])

    def pairwise(self, a, b):
        return np.abs(self.as_points(a)[:, 0][:, None] - self.as_points(b)[:, 0][None, :])

    def contains(self, points, margin=0.0):
        p = self.as_points(points)[:, 0]
        return (p >= -ATOL) & (p <= self.length + ATOL)

    def embed(self, points):
        s = np.clip(self.as_points(points)[:, 0], 0.0, self.length)
        i = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, len(self.vertices) - 2)
        t = (s - self._cum[i]) / (self._cum[i + 1] - self._cum[i])
        return self.vertices[i] + (self.vertices[i + 1] - self.vertices[i]) * t[:, None]

    def sample(self, level):
        return (_hier_grid_1d(level) * self.length).reshape(-1, 1)

    def validation_sample(self, level):
        m = 1 << level
        _check_sample_size(m + 1, level)
        return (np.arange(m + 1) / m * self.length).reshape(-1, 1), self.length / (2 * m)

    def net_level(self, n):
        # midpoint grid: covering radius length / (2m) <= 2**-n
        m = max(1, math.ceil(self.length * 2.0 ** (n - 1) - 1e-9))
        if m > MAX_NET_POINTS:
            raise ResolutionExceeded(f"net level {n} needs {m} points")
        return ((np.arange(m) + 0.5) / m * self.length).reshape(-1, 1)

    def geodesic_length(self, p, q):
        return self.distance(p, q)

    def path_eval(self, p, q, s):
        p = self.as_points(p)[:, 0]
        q = self.as_points(q)[:, 0]
        s = np.asarray(s, dtype=np.float64).reshape(-1)
        delta = q - p
        length = np.abs(delta)
        out = p + np.sign(delta) * np.minimum(s, length)
        out = np.where(s >= length, np.broadcast_to(q, out.shape), out)
        return out.reshape(-1, 1)


class SinglePoint(Space):
    kind = "point"
    is_length_space = True

    def __init__(self, coords=(0.0,)):
        self.coords = np.asarray(coords, dtype=np.float64).reshape(1, -1)
        self.dim = self.coords.shape[1]

    def __repr__(self):
        return f"SinglePoint({self.coords[0].tolist()})"

    def __eq__(self, other):
        return type(other) is type(self) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((self.kind, self.coords.tobytes()))

    diameter = 0.0

    def describe(self):
        return {"kind": self.kind, "coords": self.coords[0].tolist()}

    def distance(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        return np.sqrt(np.sum((a - b) ** 2, axis=-1))

    def pairwise(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))

    def contains(self, points, margin=0.0):
        return self.distance(points, np.broadcast_to(self.coords, self.as_points(points).shape)) == 0

    def sample(self, level):
        return self.coords.copy()

    def validation_sample(self, level):
        return self.coords.copy(), 0.0

    def net_level(self, n):
        return self.coords.copy()

    def geodesic_length(self, p, q):
        return self.distance(p, q)

    def path_eval(self, p, q, s):
        s = np.asarray(s, dtype=np.float64).reshape(-1)
        return np.repeat(self.coords, s.size, axis=0)


# ------------------------------------------------------------- ultrametric


class CantorUltrametric(Space):
    """Sequences over ``branching`` symbols, ``d(x, y) = scale**j`` with ``j`` the
    first index where they differ.  Points are integer digit rows of length
    ``depth``; the diameter is 1."""

    kind = "cantor-ultrametric"
    is_length_space = False

    def __init__(self, branching=2, scale=0.5, depth=16):
        if branching < 2:
            raise InvalidInput("branching must be >= 2")
        if not 0 < scale < 1:
            raise InvalidInput("scale must lie in (0, 1)")
        self.branching = int(branching)
        self.scale = float(scale)
        self.depth = int(depth)
        self.dim = self.depth

    def __repr__(self):
        return f"CantorUltrametric(branching={self.branching}, scale={self.scale}, depth={self.depth})"

    def __eq__(self, other):
        return type(other) is type(self) and (self.branching, self.scale, self.depth) == (
            other.branching, other.scale, other.depth)

    def __hash__(self):
        return hash((self.kind, self.branching, self.scale, self.depth))

    diameter = 1.0

    def describe(self):
        return {"kind": self.kind, "branching": self.branching, "scale": self.scale,
                "depth": self.depth}

    def as_points(self, points):
        a = np.asarray(points, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.shape[1] != self.depth:
            raise InvalidInput(f"ultrametric points need {self.depth} digits")
        return a

    def distance(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        diff = a != b
        first = np.argmax(diff, axis=-1)
        return np.where(diff.any(axis=-1), self.scale ** first, 0.0)

    def pairwise(self, a, b):
        a = self.as_points(a)
        b = self.as_points(b)
        diff = a[:, None, :] != b[None, :, :]
        first = np.argmax(diff, axis=-1)
        return np.where(diff.any(axis=-1), self.scale ** first, 0.0)

    def cell_diameter(self, level, base=None):
        return self.scale ** level

    def contains(self, points, margin=0.0):
        p = self.as_points(points)
        return ((p >= 0) & (p < self.branching)).all(axis=1)

    def sample(self, level):
        """All addresses fixing the first ``level`` digits (rest zero), lexicographic."""
        level = min(level, self.depth)
        n = self.branching ** level
        idx = np.arange(n)
        digits = np.zeros((n, self.depth), dtype=np.int64)
        for j in range(level):
            digits[:, j] = (idx // self.branching ** (level - 1 - j)) % self.branching
        return digits

    def validation_sample(self, level):
        return self.sample(level), self.scale ** min(level, self.depth)

    def cell_index(self, points, level):
        p = self.as_points(points)[:, :level]
        w = self.branching ** np.arange(level - 1, -1, -1, dtype=np.int64)
        return (p * w).sum(axis=1)


# ---------------------------------------------------------- nets and paths


@dataclass(frozen=True)
class ConnectorPath:
    """A 1-Lipschitz path on ``[0, domain_length]`` from ``start`` to ``end``.

    Geodesic at unit speed, then constant once ``end`` is reached.
    """

    space: Space = field(repr=False)
    start: np.ndarray
    end: np.ndarray
    domain_length: float
    length: float

    @property
    def endpoints(self):
        return self.start, self.end

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64).reshape(-1)
        if (s < -ATOL).any() or (s > self.domain_length + ATOL).any():
            raise InvalidInput("path parameter outside its domain")
        n = s.size
        p = np.repeat(self.start.reshape(1, -1), n, axis=0)
        q = np.repeat(self.end.reshape(1, -1), n, axis=0)
        return self.space.path_eval(p, q, s)


def connect(parent, child, level, space):
    """Connector from a level-(n-1) point to a level-n point on ``[0, 2**-(n-1)]``."""
    if not space.is_length_space:
        raise InvalidInput(f"{space.kind} has no paths")
    p = space.as_points(parent)[:1]
    q = space.as_points(child)[:1]
    budget = math.ldexp(1.0, -(int(level) - 1))
    length = float(space.geodesic_length(p, q)[0])
    if length > budget + ATOL:
        raise BudgetExceeded(
            f"path length {length:.6g} exceeds the level-{level} budget {budget:.6g}")
    return ConnectorPath(space, p[0].copy(), q[0].copy(), budget, length)


@dataclass(frozen=True)
class NetHierarchy:
    """Levels ``Y_0..Y_N``; ``parents[n][j]`` is the index in ``Y_{n-1}`` of the
    parent of ``Y_n[j]`` (``parents[0]`` is empty)."""

    space: Space = field(repr=False)
    levels: list
    parents: list
    covering_radii: list
    validation_resolution: float

    @property
    def n_max(self):
        return len(self.levels) - 1

    @property
    def sizes(self):
        return [int(lv.shape[0]) for lv in self.levels]

    def children(self, n, i):
        """Indices in ``Y_n`` whose parent is ``Y_{n-1}[i]`` (the set C(y_i))."""
        return np.flatnonzero(self.parents[n] == i)

    def connector(self, n, j):
        parent = self.levels[n - 1][self.parents[n][j]]
        return connect(parent, self.levels[n][j], n, self.space)

    def edges(self, n):
        return [(int(p), int(j)) for j, p in enumerate(self.parents[n])]

    def to_dict(self):
        return {
            "space": self.space.describe(),
            "n_max": self.n_max,
            "sizes": self.sizes,
            "covering_radii": [float(r) for r in self.covering_radii],
            "validation_resolution": self.validation_resolution,
            "levels": [
                {"n": n, "k": self.sizes[n], "parent_edges": self.edges(n) if n else []}
                for n in range(len(self.levels))
            ],
        }


def build_net_hierarchy(space, n_max, validation_level: Optional[int] = None):
    """Nets ``Y_0..Y_{n_max}`` whose covering radius at level n is at most 2**-n.

    Each child is assigned to its nearest parent (ties to the lowest parent
    index).  The covering property is audited on a validation grid
    ``validation_level`` (default ``n_max + 2``) dyadic levels deep.
    """
    if n_max < 1:
        raise InvalidInput("n_max must be >= 1")
    if not space.is_length_space:
        raise InvalidInput(f"{space.kind} is not a length space; it cannot be a target")
    vlevel = n_max + 2 if validation_level is None else int(validation_level)
    sample, resolution = space.validation_sample(vlevel)
    levels, parents, radii = [], [], []
    for n in range(n_max + 1):
        pts = space.net_level(n)
        if n == 0 and pts.shape[0] != 1:
            raise ResolutionExceeded("level 0 must be a single point")
        radius = float(space.nearest_distance(sample, pts).max())
        if radius > math.ldexp(1.0, -n) + ATOL:
            raise ResolutionExceeded(
                f"net level {n}: sampled covering radius {radius:.6g} > 2**-{n}")
        levels.append(pts)
        radii.append(radius)
        if n == 0:
            parents.append(np.empty(0, dtype=np.int64))
        else:
            idx, dist = space.nearest(pts, levels[n - 1])
            if (dist > math.ldexp(1.0, -(n - 1)) + ATOL).any():
                raise ResolutionExceeded(f"net level {n}: a child is out of its parent's reach")
            parents.append(np.asarray(idx, dtype=np.int64))
    return NetHierarchy(space, levels, parents, radii, float(resolution))


def parse_space(spec):
    """Registry for CLI use: ``interval``, ``square``, ``cube:d``,
    ``snowflake:d:alpha``, ``circle[:c]``, ``polyline:x,y;x,y;...``,
    ``point:x[,y...]``, ``ultrametric:b:scale:depth``."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "interval":
            return EuclideanCube(1)
        if kind == "square":
            return EuclideanCube(2)
        if kind == "cube":
            return EuclideanCube(int(arg or 1))
        if kind == "snowflake":
            d, _, a = arg.partition(":")
            return SnowflakeCube(int(d), float(a))
        if kind == "circle":
            return Circle(float(arg) if arg else 1.0)
        if kind == "polyline":
            return Polyline([[float(v) for v in p.split(",")] for p in arg.split(";")])
        if kind == "point":
            return SinglePoint([float(v) for v in arg.split(",")])
        if kind == "ultrametric":
            b, s, d = arg.split(":")
            return CantorUltrametric(int(b), float(s), int(d))
    except ValueError as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"bad space parameters in {spec!r}") from exc
    raise InvalidInput(f"unknown space {spec!r}")
