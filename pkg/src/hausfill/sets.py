"""Finite-resolution models of subsets of a cube or of the Cantor ultrametric.

A :class:`SetSample` answers "which cells of level L meet the set" for every
level up to its resolution ``depth``.  Cells are integer index rows of a
``base``-adic grid on the ambient cube ``[0, side]**dim``.  Rules:

``full``     every cell (the cube itself, or a sub-cube when rooted)
``cantor``   middle-thirds Cantor set/dust, base 3, digits {0, 2} per axis
``cells``    an explicit list of cells at ``depth``
``points``   a finite point set
``empty``    nothing
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidInput, ResolutionExceeded
from .spaces import CantorUltrametric, EuclideanCube, Space

MAX_CELLS = 1 << 25


def depth_cap(base):
    """Resolution cap per grid base: 26 dyadic, 24 triadic."""
    if base == 2:
        return 26
    if base == 3:
        return 24
    return max(1, int(52 / math.log2(base)) // 2)


def _lex_sort(cells):
    if cells.shape[0] == 0:
        return cells
    order = np.lexsort(cells.T[::-1])
    return cells[order]


def _unique_rows(cells):
    if cells.shape[0] == 0:
        return cells
    return np.unique(cells, axis=0)


def _product(axes):
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)


def _cantor_axis(level, prefix=0, prefix_level=0):
    """Indices at ``level`` of the triadic Cantor cells under a prefix cell."""
    idx = np.array([prefix], dtype=np.int64)
    for _ in range(prefix_level, level):
        idx = np.concatenate([3 * idx, 3 * idx + 2])
    return np.sort(idx)


def _is_cantor_index(idx, level):
    idx = np.asarray(idx, dtype=np.int64).copy()
    ok = np.ones(idx.shape, dtype=bool)
    for _ in range(level):
        ok &= (idx % 3) != 1
        idx //= 3
    return ok


@dataclass(frozen=True)
class SetSample:
    ambient: Space = field(repr=False)
    rule: str
    base: int
    depth: int
    cells: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    points: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    root_level: int = 0
    root: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.rule not in ("full", "cantor", "cells", "points", "empty"):
            raise InvalidInput(f"unknown set rule {self.rule!r}")
        if self.depth > depth_cap(self.base):
            raise ResolutionExceeded(f"depth {self.depth} exceeds the base-{self.base} cap")
        if not self.root:
            object.__setattr__(self, "root", (0,) * self.dim)

    # geometry -----------------------------------------------------------

    @property
    def dim(self):
        if isinstance(self.ambient, CantorUltrametric):
            return 1
        return self.ambient.dim

    @property
    def side(self):
        return getattr(self.ambient, "side", 1.0)

    def cell_side(self, level):
        return self.side * float(self.base) ** (-level)

    def cell_diameter(self, level):
        return self.ambient.cell_diameter(level, self.base)

    def cell_bounds(self, level, cells):
        s = self.cell_side(level)
        lo = np.asarray(cells, dtype=np.float64) * s
        return lo, lo + s

    # membership ---------------------------------------------------------

    def _check_level(self, level):
        if level < 0:
            raise InvalidInput("level must be >= 0")
        if level > self.depth:
            raise ResolutionExceeded(
                f"level {level} is finer than the set's resolution {self.depth}")

    def _root_at(self, level):
        """Root cell coarsened/refined to ``level`` as (index row, span per axis)."""
        r = np.asarray(self.root, dtype=np.int64)
        if level <= self.root_level:
            return r // self.base ** (self.root_level - level), 1
        span = self.base ** (level - self.root_level)
        return r * span, span

    def cells_at(self, level):
        """Sorted (lexicographic) index rows of the level-``level`` cells meeting the set."""
        self._check_level(level)
        b, dim = self.base, self.dim
        if self.rule == "empty":
            return np.empty((0, dim), dtype=np.int64)
        if self.rule == "full":
            start, span = self._root_at(level)
            if span ** dim > MAX_CELLS:
                raise ResolutionExceeded(f"{span ** dim} cells at level {level}")
            return _product([start[k] + np.arange(span) for k in range(dim)])
        if self.rule == "cantor":
            if level <= self.root_level:
                start, _ = self._root_at(level)
                return start.reshape(1, -1)
            count = 2 ** ((level - self.root_level) * dim)
            if count > MAX_CELLS:
                raise ResolutionExceeded(f"{count} cells at level {level}")
            axes = [_cantor_axis(level, self.root[k], self.root_level) for k in range(dim)]
            return _product(axes)
        if self.rule == "cells":
            out = self.cells // self.base ** (self.depth - level)
        else:
            out = self._point_cells(self.points, level)
        out = _unique_rows(out)
        return self._clip_to_root(out, level)

    def _point_cells(self, pts, level):
        if isinstance(self.ambient, CantorUltrametric):
            return self.ambient.cell_index(pts, level).reshape(-1, 1)
        n = self.base ** level
        idx = np.floor(np.asarray(pts, dtype=np.float64) / self.side * n).astype(np.int64)
        return np.clip(idx, 0, n - 1)

    def _clip_to_root(self, cells, level):
        if self.root_level == 0 or cells.shape[0] == 0:
            return cells
        r = np.asarray(self.root, dtype=np.int64)
        if level >= self.root_level:
            up = cells // self.base ** (level - self.root_level)
            return cells[(up == r).all(axis=1)]
        start, _ = self._root_at(level)
        return cells[(cells == start).all(axis=1)]

    def contains_cells(self, level, cells):
        """Whether each given level-``level`` cell meets the set."""
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, self.dim)
        if self.rule == "full":
            start, span = self._root_at(level)
            n = self.base ** level
            ok = ((cells >= 0) & (cells < n)).all(axis=1)
            return ok & ((cells >= start) & (cells < start + span)).all(axis=1)
        if self.rule == "cantor":
            ok = np.ones(cells.shape[0], dtype=bool)
            for k in range(self.dim):
                ok &= _is_cantor_index(cells[:, k], level)
            return ok & self._under_root(level, cells)
        have = self.cells_at(level)
        if have.shape[0] == 0:
            return np.zeros(cells.shape[0], dtype=bool)
        keys = {tuple(r) for r in have.tolist()}
        return np.array([tuple(r) in keys for r in cells.tolist()], dtype=bool)

    def _under_root(self, level, cells):
        r = np.asarray(self.root, dtype=np.int64)
        if level >= self.root_level:
            return (cells // self.base ** (level - self.root_level) == r).all(axis=1)
        start, _ = self._root_at(level)
        return (cells == start).all(axis=1)

    def contains_points(self, points, level):
        """Membership at resolution: the point's level cell meets the set."""
        return self.contains_cells(level, self._point_cells(points, level))

    def is_empty(self):
        return self.rule == "empty" or self.cells_at(0).shape[0] == 0

    def cells_in_box(self, level, lo, hi):
        """Cells at ``level`` meeting the set whose closed cell meets ``[lo, hi]``."""
        self._check_level(level)
        dim = self.dim
        lo = np.asarray(lo, dtype=np.float64).reshape(dim)
        hi = np.asarray(hi, dtype=np.float64).reshape(dim)
        n = self.base ** level
        s = self.cell_side(level)
        a = np.clip(np.floor(lo / s).astype(np.int64) - 1, 0, n - 1)
        z = np.clip(np.floor(hi / s).astype(np.int64) + 1, 0, n - 1)
        if self.rule in ("full", "cantor"):
            if self.rule == "full":
                start, span = self._root_at(level)
                a = np.maximum(a, start)
                z = np.minimum(z, start + span - 1)
                if (z < a).any():
                    return np.empty((0, dim), dtype=np.int64)
                if np.prod(z - a + 1) > MAX_CELLS:
                    raise ResolutionExceeded("box holds too many cells")
                cand = _product([np.arange(a[k], z[k] + 1) for k in range(dim)])
            else:
                cand = self._cantor_box(level, a, z)
        else:
            cand = self.cells_at(level)
            cand = cand[((cand >= a) & (cand <= z)).all(axis=1)]
        if cand.shape[0] == 0:
            return cand
        clo, chi = self.cell_bounds(level, cand)
        meet = ((chi >= lo - 1e-15) & (clo <= hi + 1e-15)).all(axis=1)
        return _lex_sort(cand[meet])

    def _cantor_box(self, level, a, z):
        axes = []
        for k in range(self.dim):
            idx = np.array([self._root_at(0)[0][k]], dtype=np.int64)
            for lv in range(1, level + 1):
                shift = self.base ** (level - lv)
                idx = np.concatenate([3 * idx, 3 * idx + 2])
                keep = ((idx + 1) * shift - 1 >= a[k]) & (idx * shift <= z[k])
                idx = idx[keep]
                if idx.size == 0:
                    return np.empty((0, self.dim), dtype=np.int64)
            axes.append(np.sort(idx))
        cells = _product(axes)
        return cells[self._under_root(level, cells)]

    def anchors(self, level, cells):
        """A point of the set inside each given cell.

        Midpoints for full cells; ``corner + side/4`` for Cantor cells (1/4 lies
        in the Cantor set); for explicit cells the midpoint of the first listed
        leaf below the cell; for point sets the first point in the cell.
        """
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, self.dim)
        s = self.cell_side(level)
        if self.rule == "full":
            return (cells + 0.5) * s
        if self.rule == "cantor":
            return (cells + 0.25) * s
        if self.rule == "cells":
            leaves = _lex_sort(self.cells)
            up = leaves // self.base ** (self.depth - level)
            out = np.empty(cells.shape, dtype=np.float64)
            leaf_s = self.cell_side(self.depth)
            for i, c in enumerate(cells):
                hit = np.flatnonzero((up == c).all(axis=1))
                if hit.size == 0:
                    raise InvalidInput("anchor requested for a cell outside the set")
                out[i] = (leaves[hit[0]] + 0.5) * leaf_s
            return out
        if self.rule == "points":
            pts = np.asarray(self.points, dtype=np.float64)
            pc = self._point_cells(pts, level)
            out = np.empty(cells.shape, dtype=np.float64)
            for i, c in enumerate(cells):
                hit = np.flatnonzero((pc == c).all(axis=1))
                if hit.size == 0:
                    raise InvalidInput("anchor requested for a cell outside the set")
                out[i] = pts[hit[0]]
            return out
        raise InvalidInput("the empty set has no anchors")

    def restrict(self, level, cell):
        """The part of the set inside one level-``level`` cell."""
        cell = tuple(int(c) for c in np.asarray(cell).reshape(-1))
        if level < self.root_level:
            raise InvalidInput("cannot restrict above the current root")
        return replace(self, root_level=level, root=cell,
                       label=f"{self.label}[{level}:{','.join(map(str, cell))}]")

    def perfect_like(self, level_from, level_to):
        """Every set cell in the level range has at least two child cells in the set."""
        for lv in range(level_from, level_to):
            parents = self.cells_at(lv)
            kids = self.cells_at(lv + 1) // self.base
            if parents.shape[0] == 0:
                return False
            _, counts = np.unique(kids, axis=0, return_counts=True)
            if counts.shape[0] < parents.shape[0] or (counts < 2).any():
                return False
        return True

    def describe(self):
        out = {"rule": self.rule, "base": self.base, "depth": self.depth,
               "ambient": self.ambient.describe(), "label": self.label}
        if self.root_level:
            out["root"] = {"level": self.root_level, "cell": list(self.root)}
        return out


# ------------------------------------------------------------ constructors


def cube_set(dim=1, side=1.0, depth=None):
    amb = EuclideanCube(dim, side)
    return SetSample(amb, "full", 2, depth_cap(2) if depth is None else depth,
                     label="interval" if dim == 1 else ("square" if dim == 2 else f"cube:{dim}"))


def unit_interval(depth=None):
    return cube_set(1, depth=depth)


def unit_square(depth=None):
    return cube_set(2, depth=depth)


def cantor_set(dim=1, depth=None, ambient=None):
    """Middle-thirds Cantor set (dim 1) or Cantor dust ``C**dim`` in the unit cube."""
    amb = ambient if ambient is not None else EuclideanCube(dim)
    return SetSample(amb, "cantor", 3, depth_cap(3) if depth is None else depth,
                     label="cantor" if dim == 1 else f"cantor-dust:{dim}")


def from_cells(ambient, base, depth, cells, label="cells"):
    cells = _unique_rows(np.asarray(cells, dtype=np.int64).reshape(-1, ambient.dim))
    n = base ** depth
    if cells.shape[0] and ((cells < 0) | (cells >= n)).any():
        raise InvalidInput("cell index outside the grid")
    return SetSample(ambient, "cells", base, depth, cells=cells, label=label)


def from_points(ambient, points, base=2, depth=None, label="points"):
    if isinstance(ambient, CantorUltrametric):
        pts = ambient.as_points(points)
        depth = ambient.depth if depth is None else depth
        return SetSample(ambient, "points", ambient.branching, depth, points=pts, label=label)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, ambient.dim)
    if pts.shape[0] and not ambient.contains(pts).all():
        raise InvalidInput("points outside the ambient cube")
    return SetSample(ambient, "points", base, depth_cap(base) if depth is None else depth,
                     points=pts, label=label)


def point_set(coords, ambient=None):
    coords = np.asarray(coords, dtype=np.float64).reshape(1, -1)
    amb = ambient if ambient is not None else EuclideanCube(coords.shape[1])
    return from_points(amb, coords, label="point")


def empty_set(ambient=None, base=2):
    amb = ambient if ambient is not None else EuclideanCube(1)
    return SetSample(amb, "empty", base, 0, label="empty")


def ultrametric_full(space):
    return SetSample(space, "full", space.branching, space.depth, label="ultrametric")


def parse_set(spec):
    """Registry for CLI use: ``interval``, ``square``, ``cube:d``, ``cantor``,
    ``cantor-dust:d``, ``point:x[,y...]``, ``empty``."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "interval":
            return unit_interval()
        if kind == "square":
            return unit_square()
        if kind == "cube":
            return cube_set(int(arg or 1))
        if kind == "cantor":
            return cantor_set(1)
        if kind == "cantor-dust":
            return cantor_set(int(arg or 2))
        if kind == "point":
            return point_set([float(v) for v in arg.split(",")])
        if kind == "empty":
            return empty_set()
    except ValueError as exc:
        raise InvalidInput(f"bad set parameters in {spec!r}") from exc
    raise InvalidInput(f"unknown set {spec!r}")
