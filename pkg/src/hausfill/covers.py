"""delta-covers and the upper bounds they certify for ``H^h_delta``.

Only upper bounds are computed: a grid (or ball) cover whose pieces have
diameter <= delta gives ``H^h_delta(E) <= sum xi(U_i)``.  Diameters are always
measured in the ambient metric, so a square cell of side ``s`` counts as
``sqrt(2) * s``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .errors import InsufficientMass, InvalidInput, ResolutionExceeded, UndefinedDimension
from .hfun import premeasure_eval, premeasure_many
from .spaces import CantorUltrametric, EuclideanCube, SnowflakeCube

RTOL = 1e-12


@dataclass(frozen=True)
class CoverEstimate:
    """A delta-cover with its premeasure sum.

    ``kind`` is ``grid`` (cells of one grid level, ``cells`` are index rows) or
    ``ball`` (``cells`` are centres, ``radii`` their radii).
    """

    delta: float
    kind: str
    diameters: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    sum: float
    exact_sum: Fraction = field(repr=False)
    cells: Optional[np.ndarray] = field(default=None, repr=False)
    radii: Optional[np.ndarray] = field(default=None, repr=False)
    level: Optional[int] = None

    @property
    def cell_count(self):
        return int(self.diameters.shape[0])

    def recompute(self, h):
        """Premeasure sum of the listed pieces, from scratch."""
        return _exact_total(premeasure_many(h, self.diameters))

    def to_row(self):
        return {"delta": self.delta, "cell_count": self.cell_count, "sum": self.sum}

    def to_dict(self):
        out = self.to_row()
        out.update({"kind": self.kind, "level": self.level,
                    "max_diameter": float(self.diameters.max()) if self.cell_count else 0.0,
                    "exact_sum": str(self.exact_sum)})
        return out


def _exact_total(values):
    """Exact rational sum of float premeasure values, grouped by value."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return Fraction(0)
    uniq, counts = np.unique(values, return_counts=True)
    return sum((Fraction(float(v)) * int(c) for v, c in zip(uniq, counts)), Fraction(0))


def _empty_cover(delta, kind="grid"):
    z = np.empty(0)
    return CoverEstimate(float(delta), kind, z, z, 0.0, Fraction(0), cells=np.empty((0, 1), np.int64))


def cover_level(E, delta):
    """Coarsest grid level of ``E`` whose cells have diameter <= delta."""
    if not delta > 0:
        raise InvalidInput("delta must be positive")
    limit = delta * (1.0 + RTOL)
    for level in range(E.depth + 1):
        if E.cell_diameter(level) <= limit:
            return level
    raise ResolutionExceeded(
        f"delta={delta:g} is below the set's resolution (level {E.depth}, "
        f"cell diameter {E.cell_diameter(E.depth):g})")


def grid_cover(E, h, delta):
    """Cover ``E`` by the cells of the coarsest grid level with diameter <= delta.

    Only cells meeting ``E`` are used.  The result certifies
    ``H^h_delta(E) <= result.sum``.
    """
    if not delta > 0:
        raise InvalidInput("delta must be positive")
    if E.is_empty():
        return _empty_cover(delta)
    level = cover_level(E, delta)
    cells = E.cells_at(level)
    diam = E.cell_diameter(level)
    xi = premeasure_eval(h, diam)
    n = cells.shape[0]
    diameters = np.full(n, diam)
    values = np.full(n, xi)
    return CoverEstimate(float(delta), "grid", diameters, values, float(n * xi),
                         Fraction(xi) * n, cells=cells, level=level)


def verify_grid_cover(cover, E, check_level=None):
    """Re-check a grid cover: diameters within delta, sum consistent, and every
    cell of ``E`` at ``check_level`` (default: two levels finer, capped at the
    resolution) lies inside a listed cell."""
    if cover.cell_count and cover.diameters.max() > cover.delta * (1.0 + RTOL):
        return False
    if cover.exact_sum != _exact_total(cover.values):
        return False
    if E.is_empty():
        return True
    lv = cover.level
    fine = min(E.depth, lv + 2) if check_level is None else check_level
    up = E.cells_at(fine) // E.base ** (fine - lv)
    return bool(np.isin(_linear(up, E.base ** lv), _linear(cover.cells, E.base ** lv)).all())


def _linear(cells, n):
    """Row-major integer key of each index row on an ``n``-per-axis grid."""
    cells = np.asarray(cells, dtype=np.int64)
    w = n ** np.arange(cells.shape[1] - 1, -1, -1, dtype=np.int64)
    return cells @ w


def measure_upper_profile(E, h, deltas):
    """One :func:`grid_cover` per delta (strictly decreasing), unsmoothed."""
    deltas = [float(d) for d in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise InvalidInput("deltas must be strictly decreasing")
    return [grid_cover(E, h, d) for d in deltas]


def certified_bounds(profile):
    """Best bound per delta: a cover admissible at a smaller delta is admissible
    at every larger one, so the bound at ``delta_i`` is ``min_{j >= i} sum_j``.
    The result is non-decreasing as delta decreases."""
    sums = [c.sum for c in profile]
    out = []
    best = math.inf
    for s in reversed(sums):
        best = min(best, s)
        out.append(best)
    return out[::-1]


# --------------------------------------------------------------- dimension


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    intercept: float
    r2: float
    scales: list
    stderr: float = 0.0

    def to_rows(self):
        return [{"scale": s, "count": c} for s, c in self.scales]

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "stderr": self.stderr, "scales": [[s, c] for s, c in self.scales]}


def fit_dimension(scales, counts):
    """Least squares of ``log(count)`` against ``log(1/scale)``."""
    scales = np.asarray(scales, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    if scales.size < 4:
        raise InvalidInput("a dimension fit needs at least 4 scales")
    if (counts <= 0).any():
        raise UndefinedDimension("a scale has zero occupied boxes")
    x = np.log(1.0 / scales)
    y = np.log(counts)
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    stderr = math.sqrt(ss_res / (x.size - 2) / sxx) if x.size > 2 else 0.0
    return DimensionEstimate(slope, intercept, r2,
                             [(float(s), int(c)) for s, c in zip(scales, counts)], stderr)


def box_dimension(E, depth_lo, depth_hi):
    """Box-counting slope over grid levels ``depth_lo..depth_hi`` of ``E``'s base."""
    if depth_hi - depth_lo < 3:
        raise InvalidInput("box_dimension needs depth_hi - depth_lo >= 3")
    if depth_lo < 0:
        raise InvalidInput("depth_lo must be >= 0")
    if E.is_empty():
        raise UndefinedDimension("the empty set has no box dimension")
    levels = range(depth_lo, depth_hi + 1)
    counts = [E.cells_at(j).shape[0] for j in levels]
    scales = [E.cell_side(j) for j in levels]
    return fit_dimension(scales, counts)


# ------------------------------------------------------------------ greedy


def greedy_disjoint_subsets(E, h, m, depth):
    """First ``m`` cells of ``E`` at ``depth`` (lexicographic) with positive
    premeasure, each returned as the part of ``E`` inside it."""
    if m < 1:
        raise InvalidInput("m must be >= 1")
    cells = E.cells_at(depth)
    if premeasure_eval(h, E.cell_diameter(depth)) <= 0:
        cells = cells[:0]
    if cells.shape[0] < m:
        raise InsufficientMass(f"only {cells.shape[0]} positive cells at depth {depth}, need {m}")
    return [E.restrict(depth, c) for c in cells[:m]]


def _default_stream_level(S, sep):
    if isinstance(S, CantorUltrametric):
        lv = 0
        while S.scale ** lv >= sep and lv < S.depth:
            lv += 1
        return lv
    span = getattr(S, "side", None) or getattr(S, "circumference", None) or getattr(S, "length", 1.0)
    if isinstance(S, SnowflakeCube):
        sep = sep ** (1.0 / S.alpha)
    return max(0, min(12, math.ceil(math.log2(max(span / sep, 1.0))) + 2))


def separated_net(S, sep, stream=None):
    """Greedy maximal ``sep``-separated subset of a point stream.

    The stream defaults to the space's deterministic hierarchical sample.
    Every stream point ends up within ``sep`` of the returned net.
    """
    if not sep > 0:
        raise InvalidInput("sep must be positive")
    pts = S.sample(_default_stream_level(S, sep)) if stream is None else S.as_points(stream)
    if isinstance(S, EuclideanCube) and not isinstance(S, SnowflakeCube):
        return pts[kernels.greedy_separated(pts, sep)]
    if isinstance(S, SnowflakeCube):
        return pts[kernels.greedy_separated(pts, sep ** (1.0 / S.alpha))]
    keep = []
    for i in range(pts.shape[0]):
        if keep:
            d = S.distance(pts[keep], np.repeat(pts[i:i + 1], len(keep), axis=0))
            if (d < sep - 1e-12).any():
                continue
        keep.append(i)
    return pts[keep]


def net_is_maximal(S, net, stream, sep):
    """Every stream point lies within ``sep`` of the net."""
    d = S.pairwise(stream, net).min(axis=1)
    return bool((d < sep + 1e-12).all())


# ------------------------------------------------------------ ball covers


def ball_cover(space, points, centers, radii, h, delta):
    """Explicit cover of ``points`` by closed balls ``B(centers_i, radii_i)``.

    Each ball is charged the diameter bound ``2 * radius``; raises if a ball is
    too large for ``delta`` or a point is left uncovered.
    """
    centers = space.as_points(centers)
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (centers.shape[0],)).copy()
    diameters = 2.0 * radii
    if diameters.size and diameters.max() > delta * (1.0 + RTOL):
        raise InvalidInput("a ball is wider than delta; not a delta-cover")
    pts = space.as_points(points)
    for start in range(0, pts.shape[0], 1024):
        d = space.pairwise(pts[start:start + 1024], centers)
        if not (d <= radii[None, :] + 1e-12).any(axis=1).all():
            raise InvalidInput("the balls do not cover every point")
    values = premeasure_many(h, diameters)
    exact = _exact_total(values)
    return CoverEstimate(float(delta), "ball", diameters, values, float(exact), exact,
                         cells=centers, radii=radii)
