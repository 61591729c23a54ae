"""The space-filling construction: a continuous map that sends a perfect
``h``-null set ``P'`` inside ``P`` onto a length-compact target ``Y``.

Level ``n`` places one ball ``B(x_i^n, eps_n)`` per net point of ``Y_n`` (plus
padding balls so every parent has two children), centred in ``P`` and nested in
the parent's inner ball.  The level maps follow the recursion

    f_0 = y_0,   f_n(x) = gamma_i^n(2**-(n-1) * eta_i^n(x))  inside ball i,
                 f_n(x) = f_{n-1}(x)                          elsewhere,

with ``eta`` a Lipschitz bump equal to one on the inner ball.  The uniform limit
is never formed; evaluations carry the tail bound ``2**-(n-1)``.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .covers import ball_cover
from .errors import CapacityExceeded, DepthExceeded, InvalidInput, InvalidRadii, ResolutionExceeded
from .spaces import EuclideanCube, SnowflakeCube, build_net_hierarchy
from .sets import depth_cap

ATOL = 1e-12
# Halvings of eps tried past the smallness/room bound before giving up.
MAX_HALVINGS = 12


# ------------------------------------------------------------------- bumps


@dataclass(frozen=True)
class BumpFunction:
    """``eta(x) = clamp((m - d(x, x0)) / (m - delta))`` with ``m = (delta + eps)/2``."""

    center: np.ndarray
    delta: float
    eps: float
    space: EuclideanCube = field(repr=False)

    @property
    def support_radius(self):
        return 0.5 * (self.delta + self.eps)

    @property
    def lipschitz(self):
        return 2.0 / (self.eps - self.delta)

    def __call__(self, x):
        pts = self.space.as_points(x)
        d = self.space.distance(pts, np.broadcast_to(self.center, pts.shape))
        return bump_values(d, self.delta, self.eps)


def bump_values(d, delta, eps):
    m = 0.5 * (delta + eps)
    return np.clip((m - np.asarray(d, dtype=np.float64)) / (m - delta), 0.0, 1.0)


def bump(x0, delta, eps, X):
    if not 0 < delta < eps:
        raise InvalidRadii(f"need 0 < delta < eps, got delta={delta}, eps={eps}")
    return BumpFunction(X.as_points(x0)[0].copy(), float(delta), float(eps), X)


# ------------------------------------------------------------ ball system


@dataclass(frozen=True)
class BallLevel:
    """Balls of one level.  ``parent`` indexes the previous level (-1 at level 1);
    ``source``/``target`` are the connector endpoints in ``Y``; ``net_index`` is
    the net point a ball serves, -1 for padding balls with constant connectors."""

    n: int
    centers: np.ndarray = field(repr=False)
    eps: float
    delta: float
    parent: np.ndarray = field(repr=False)
    source: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    net_index: np.ndarray = field(repr=False)
    resolution: int

    @property
    def k(self):
        return int(self.centers.shape[0])

    def smallness(self, h):
        """Exact ``k_n * h(2 eps_n)`` (on the float value of ``h``)."""
        return Fraction(self.k) * Fraction(float(h(2.0 * self.eps)))

    def children_of(self, j):
        return np.flatnonzero(self.parent == j)


@dataclass(frozen=True)
class BallSystem:
    levels: list
    h: object = field(repr=False)

    @property
    def depth(self):
        return len(self.levels)

    def level(self, n):
        return self.levels[n - 1]

    def to_dict(self):
        rows = []
        for lv in self.levels:
            s = lv.smallness(self.h)
            rows.append({"n": lv.n, "k": lv.k, "eps": lv.eps, "delta": lv.delta,
                         "padding": int((lv.net_index < 0).sum()),
                         "smallness": float(s), "smallness_exact": str(s),
                         "resolution_level": lv.resolution})
        return {"gauge": self.h.label, "levels": rows}


def _child_plan(net, n, prev):
    """Per parent ball of level n-1: the (source, target, net index) of each child."""
    pts = net.levels[n]
    primary = {}
    if prev is None:
        owners = [(-1, net.levels[0][0], 0)]
    else:
        owners = []
        for b in range(prev.k):
            j = int(prev.net_index[b])
            owners.append((b, prev.target[b], j if j >= 0 and j not in primary else -1))
            if j >= 0:
                primary.setdefault(j, b)
    plan = []
    for b, y, j in owners:
        kids = [(y, pts[c], int(c)) for c in (net.children(n, j) if j >= 0 else [])]
        while len(kids) < 2:
            kids.append((y, y, -1))
        plan.append((b, kids))
    return plan


def _grid_level(P, radius):
    """Finest-needed level whose cells have side <= radius / 2."""
    return max(0, math.ceil(math.log(2.0 * P.side / radius, P.base) - 1e-9))


def _place(P, X, plan, prev, eps):
    """Try to place every child ball at radius ``eps``; None on failure."""
    r_e = X.euclid_radius(eps)
    level = _grid_level(P, r_e)
    if level > min(P.depth, depth_cap(P.base)):
        return None
    sep_e = X.euclid_radius(3.0 * eps)
    out = []
    for b, kids in plan:
        if prev is None:
            lo = np.zeros(X.dim)
            hi = np.full(X.dim, X.side)
        else:
            c = prev.centers[b]
            reach = X.euclid_radius(prev.delta)
            lo, hi = c - reach, c + reach
        try:
            cells = P.cells_in_box(level, lo, hi)
        except ResolutionExceeded:
            return None
        if cells.shape[0] < len(kids):
            return None
        cand = P.anchors(level, cells)
        keep = X.contains(cand, margin=r_e)
        if prev is not None:
            d = X.distance(cand, np.broadcast_to(prev.centers[b], cand.shape))
            keep &= (d >= eps) & (d + eps <= prev.delta)
        cand = cand[keep]
        if cand.shape[0] < len(kids):
            return None
        idx = kernels.greedy_separated(cand, sep_e, limit=len(kids), tol=-ATOL)
        if idx.shape[0] < len(kids):
            return None
        for (src, tgt, j), x in zip(kids, cand[idx]):
            out.append((b, x, src, tgt, j))
    return out, level


def _largest_dyadic(bound):
    """Exponent j of the largest ``2**-j <= bound``."""
    j = max(0, math.ceil(-math.log2(bound) - 1e-12))
    while math.ldexp(1.0, -j) > bound:
        j += 1
    return j


def select_balls(P, net, h, N):
    """Nested, separated balls centred in ``P``, one per net point (plus padding).

    ``eps_n`` is the largest dyadic radius, found by halving, for which the
    smallness budget ``n * k_n * h(2 eps_n) < 1`` holds exactly and a greedy
    lexicographic placement meets separation and nesting; ``delta_n = eps_n/2``.
    """
    X = P.ambient
    if not isinstance(X, EuclideanCube):
        raise InvalidInput("the domain must be a Euclidean or snowflake cube")
    if N < 1 or N > net.n_max:
        raise InvalidInput(f"N must lie in 1..{net.n_max}")
    if P.is_empty():
        raise CapacityExceeded("P is empty", level=1)
    levels = []
    prev = None
    for n in range(1, N + 1):
        plan = _child_plan(net, n, prev)
        k = sum(len(kids) for _, kids in plan)
        j = 0
        while Fraction(n * k) * Fraction(float(h(2.0 * math.ldexp(1.0, -j)))) >= 1:
            j += 1
            if j > 1074:
                raise CapacityExceeded(f"no radius meets the level-{n} budget", level=n)
        if prev is not None:
            j = max(j, _largest_dyadic(prev.delta / 2.0))
        placed = None
        for jj in range(j, j + MAX_HALVINGS + 1):
            eps = math.ldexp(1.0, -jj)
            placed = _place(P, X, plan, prev, eps)
            if placed is not None:
                break
        if placed is None:
            raise CapacityExceeded(
                f"P cannot host {k} separated balls at level {n}", level=n)
        rows, res = placed
        lv = BallLevel(
            n=n,
            centers=np.array([r[1] for r in rows], dtype=np.float64).reshape(k, X.dim),
            eps=eps,
            delta=eps / 2.0,
            parent=np.array([r[0] for r in rows], dtype=np.int64),
            source=np.array([r[2] for r in rows], dtype=np.float64).reshape(k, -1),
            target=np.array([r[3] for r in rows], dtype=np.float64).reshape(k, -1),
            net_index=np.array([r[4] for r in rows], dtype=np.int64),
            resolution=res,
        )
        levels.append(lv)
        prev = lv
    return BallSystem(levels, h)


# ------------------------------------------------------------ filling map


@dataclass(frozen=True)
class FillingMap:
    X: EuclideanCube = field(repr=False)
    Y: object = field(repr=False)
    P: object = field(repr=False)
    h: object = field(repr=False)
    net: object = field(repr=False)
    balls: BallSystem = field(repr=False)
    depth: int
    base: np.ndarray
    validation_level: int
    _trees: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        for lv in self.balls.levels:
            self._trees.append(cKDTree(lv.centers))

    def trajectory(self, x):
        """``f_0(x), ..., f_N(x)`` stacked as an array of shape (N+1, n, dim Y)."""
        pts = self.X.as_points(x)
        val = np.repeat(self.base.reshape(1, -1), pts.shape[0], axis=0)
        out = [val]
        for lv, tree in zip(self.balls.levels, self._trees):
            _, idx = tree.query(pts)
            d = self.X.distance(pts, lv.centers[idx])
            inside = d < lv.eps
            val = val.copy()
            if inside.any():
                i = idx[inside]
                s = math.ldexp(1.0, -(lv.n - 1)) * bump_values(d[inside], lv.delta, lv.eps)
                val[inside] = self.Y.path_eval(lv.source[i], lv.target[i], s)
            out.append(val)
        return np.stack(out)

    def lipschitz_constants(self):
        """Reported constants ``L_n = sum_{m<=n} 2**-(m-1) * 2/(eps_m - delta_m)``."""
        acc, out = 0.0, [0.0]
        for lv in self.balls.levels:
            acc += math.ldexp(1.0, -(lv.n - 1)) * 2.0 / (lv.eps - lv.delta)
            out.append(acc)
        return out

    def centers(self, n):
        return self.balls.level(n).centers


def build_filling(X, Y, P, h, N, validation_level: Optional[int] = None):
    """Nets on ``Y``, balls in ``P`` and the resulting level maps to depth ``N``."""
    if P.ambient is not X and P.ambient.describe() != X.describe():
        raise InvalidInput("P must live in X")
    vlevel = N + 2 if validation_level is None else int(validation_level)
    net = build_net_hierarchy(Y, N, vlevel)
    balls = select_balls(P, net, h, N)
    return FillingMap(X, Y, P, h, net, balls, int(N), net.levels[0][0].copy(), vlevel)


def _is_single(X, x):
    a = np.asarray(x, dtype=np.float64)
    return a.ndim == 0 or (a.ndim == 1 and a.shape[0] == X.dim)


def eval_filling(F, x, level):
    """``(f_level(x), 2**-(level-1))``; the bound holds for the uniform limit."""
    level = int(level)
    if level > F.depth:
        raise DepthExceeded(f"level {level} exceeds the built depth {F.depth}")
    if level < 0:
        raise InvalidInput("level must be >= 0")
    vals = F.trajectory(x)[level]
    bound = math.ldexp(1.0, 1 - level)
    return (vals[0] if _is_single(F.X, x) else vals), bound


# ------------------------------------------------------------------ audits


def audit_points(F, grid_level=None, rng_seed=0, random_count=100):
    """Deterministic sample of ``X``: a grid, probes around every ball, and
    ``random_count`` seeded uniform points."""
    X = F.X
    if grid_level is None:
        grid_level = 12 if X.dim == 1 else 7
    parts = [X.validation_sample(grid_level)[0]]
    offs = np.array([0.0, 0.25, 0.5, 0.6, 0.75, 0.9, 1.0, 1.25])
    offs = np.concatenate([offs, -offs[1:]])
    for lv in F.balls.levels:
        r = X.euclid_radius(lv.eps)
        for axis in range(X.dim):
            p = np.repeat(lv.centers, offs.size, axis=0)
            p[:, axis] += np.tile(offs * r, lv.k)
            parts.append(p)
    rng = np.random.default_rng(rng_seed)
    parts.append(rng.uniform(0.0, X.side, size=(random_count, X.dim)))
    pts = np.concatenate(parts)
    return np.clip(pts, 0.0, X.side)


def cauchy_steps(F, points):
    """``max_x d_Y(f_n(x), f_{n-1}(x))`` for n = 1..N."""
    traj = F.trajectory(points)
    out = []
    for n in range(1, F.depth + 1):
        out.append(float(F.Y.distance(traj[n], traj[n - 1]).max()))
    return out


def separation_ratios(F):
    """Per level: minimum centre distance divided by ``3 eps_n`` (inf for k < 2)."""
    out = []
    for lv in F.balls.levels:
        m = kernels.min_pairwise_distance(lv.centers)
        if isinstance(F.X, SnowflakeCube):
            m = m ** F.X.alpha
        out.append(m / (3.0 * lv.eps))
    return out


def nesting_ok(F):
    """``eps_n <= d(x_i^n, parent) <= delta_{n-1} - eps_n`` and two children per ball."""
    X = F.X
    levels = F.balls.levels
    for prev, lv in zip(levels, levels[1:]):
        d = X.distance(lv.centers, prev.centers[lv.parent])
        if not ((d >= lv.eps) & (d + lv.eps <= prev.delta)).all():
            return False
        if (np.bincount(lv.parent, minlength=prev.k) < 2).any():
            return False
    return levels[0].k >= 2 if levels else True


def locality_ok(F, points):
    """``f_n == f_{n-1}`` exactly outside the level-n balls."""
    traj = F.trajectory(points)
    pts = F.X.as_points(points)
    for lv, tree in zip(F.balls.levels, F._trees):
        _, idx = tree.query(pts)
        out = F.X.distance(pts, lv.centers[idx]) >= lv.eps
        if not np.array_equal(traj[lv.n][out], traj[lv.n - 1][out]):
            return False
    return True


def centers_hit_targets(F):
    """``f_m(x_i^n) = y_i^n`` exactly for every centre and every m >= n."""
    for lv in F.balls.levels:
        traj = F.trajectory(lv.centers)
        for m in range(lv.n, F.depth + 1):
            if not np.array_equal(traj[m], lv.target):
                return False
    return True


def lipschitz_ratios(F, points, pairs=2000, seed=1):
    """Max sampled ``d_Y(f_n x, f_n x') / d_X(x, x')`` per level n = 0..N."""
    pts = F.X.as_points(points)
    rng = np.random.default_rng(seed)
    a = pts[rng.integers(0, pts.shape[0], pairs)]
    step = F.X.euclid_radius(F.balls.levels[-1].eps) / 8.0
    near = np.clip(a + rng.uniform(-step, step, a.shape), 0.0, F.X.side)
    far = pts[rng.integers(0, pts.shape[0], pairs)]
    b = np.concatenate([near, far])
    a = np.concatenate([a, a])
    dx = F.X.distance(a, b)
    ok = dx > 0
    ta, tb = F.trajectory(a[ok]), F.trajectory(b[ok])
    return [float((F.Y.distance(ta[n], tb[n]) / dx[ok]).max()) for n in range(F.depth + 1)]


def surjectivity_gap(F, level, sample_size=None):
    """Largest distance from a validation point of ``Y`` to the level-``level``
    image of the centres of levels ``1..level`` (``f_level(x_i^m) = y_i^m``)."""
    if level > F.depth:
        raise DepthExceeded(f"level {level} exceeds the built depth {F.depth}")
    sample, _ = F.Y.validation_sample(F.validation_level)
    if sample_size is not None and sample_size < sample.shape[0]:
        sample = sample[np.linspace(0, sample.shape[0] - 1, int(sample_size)).round().astype(int)]
    if level == 0:
        images = F.base.reshape(1, -1)
    else:
        xs = np.concatenate([F.centers(m) for m in range(1, level + 1)])
        images = F.trajectory(xs)[level]
    return float(F.Y.nearest_distance(sample, images).max())


@dataclass(frozen=True)
class Certificate:
    rows: list
    resolution: float

    @property
    def passed(self):
        return all(r["smallness_ok"] and r["cauchy_ok"] and r["separation_ok"]
                   and r["gap_ok"] for r in self.rows)

    def to_dict(self):
        return {"levels": self.rows, "validation_resolution": self.resolution,
                "passed": self.passed}


def certificate(F, points=None):
    """Per-level audit: ``k_n``, ``eps_n``, exact smallness, Cauchy max,
    separation, surjectivity gap and the Lipschitz constant."""
    pts = audit_points(F) if points is None else F.X.as_points(points)
    steps = cauchy_steps(F, pts)
    seps = separation_ratios(F)
    lips = F.lipschitz_constants()
    res = F.net.validation_resolution
    rows = []
    for lv, step, sep in zip(F.balls.levels, steps, seps):
        n = lv.n
        s = lv.smallness(F.h)
        gap = surjectivity_gap(F, n)
        rows.append({
            "n": n, "k": lv.k, "eps": lv.eps, "delta": lv.delta,
            "smallness": float(s), "smallness_exact": str(s),
            "smallness_ok": s < Fraction(1, n),
            "cauchy_max": step, "cauchy_bound": math.ldexp(1.0, -(n - 1)),
            "cauchy_ok": step <= math.ldexp(1.0, -(n - 1)),
            "separation_ratio": sep, "separation_ok": sep >= 1.0,
            "surjectivity_gap": gap, "gap_bound": math.ldexp(1.0, -n) + res,
            "gap_ok": gap <= math.ldexp(1.0, -n) + res,
            "lipschitz": lips[n],
        })
    return Certificate(rows, res)


def trace_csv(F, xs, levels=None):
    """CSV rows ``x, level, f, error_bound`` (coordinates split into columns)."""
    pts = F.X.as_points(xs)
    traj = F.trajectory(pts)
    levels = range(F.depth + 1) if levels is None else levels
    dx, dy = pts.shape[1], traj.shape[2]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((["x"] if dx == 1 else [f"x{i}" for i in range(dx)]) + ["level"]
               + (["f"] if dy == 1 else [f"f{i}" for i in range(dy)]) + ["error_bound"])
    for i in range(pts.shape[0]):
        for n in levels:
            w.writerow([repr(float(v)) for v in pts[i]] + [n]
                       + [repr(float(v)) for v in traj[n, i]] + [repr(math.ldexp(1.0, 1 - n))])
    return buf.getvalue()


# ---------------------------------------------------------------- null set


@dataclass(frozen=True)
class PerfectSetDescriptor:
    """``P'``: the nested intersection of the closed level unions, with the
    cover bounds ``k_n h(2 eps_n)`` and materialised witnesses."""

    source: dict
    levels: list = field(repr=False)
    bound_sequence: list
    nested: bool
    chain: np.ndarray = field(repr=False)
    chain_ok: bool
    witness_pairs: int
    witnesses_ok: bool
    in_source: bool

    @property
    def bounds_ok(self):
        return all(Fraction(b) < Fraction(1, n) for n, b in self.exact_bounds())

    def exact_bounds(self):
        return [(n, Fraction(s)) for n, _, s in self.bound_sequence]

    def to_dict(self):
        return {
            "source": self.source,
            "levels": [{"n": lv["n"], "k": lv["k"], "radius": lv["radius"]} for lv in self.levels],
            "bound_sequence": [[n, b] for n, b, _ in self.bound_sequence],
            "bounds_below_one_over_n": self.bounds_ok,
            "nested": self.nested,
            "chain_point": self.chain[-1].tolist(),
            "chain_ok": self.chain_ok,
            "witness_pairs": self.witness_pairs,
            "witnesses_ok": self.witnesses_ok,
            "witnesses_in_source": self.in_source,
        }


def _first_child_chain(levels, n, i):
    """Follow first children from ball ``i`` of level n down to the last level."""
    path = [i]
    for lv in levels[n:]:
        i = int(lv.children_of(i)[0])
        path.append(i)
    return path


def null_set_report(F):
    X = F.X
    lvls = F.balls.levels
    levels = [{"n": lv.n, "k": lv.k, "radius": lv.eps, "centers": lv.centers} for lv in lvls]
    bounds = []
    for lv in lvls:
        s = lv.smallness(F.h)
        bounds.append((lv.n, float(s), str(s)))
    nested = all(
        (X.distance(lv.centers, prev.centers[lv.parent]) + lv.eps <= prev.eps).all()
        for prev, lv in zip(lvls, lvls[1:]))

    path = _first_child_chain(lvls, 1, 0)
    chain = np.array([lvls[m].centers[i] for m, i in enumerate(path)])
    w = chain[-1:]
    chain_ok = all(
        float(X.distance(w, lvls[m].centers[i:i + 1])[0]) <= lvls[m].eps
        and float(X.pairwise(w, lvls[m].centers).min()) <= lvls[m].eps
        for m, i in enumerate(path))

    pairs, ok = 0, True
    for m in range(len(lvls) - 1):
        for b in range(lvls[m].k):
            kids = lvls[m + 1].children_of(b)
            ends = []
            for c in kids[:2]:
                p = _first_child_chain(lvls, m + 2, int(c))
                ends.append(lvls[-1].centers[p[-1]])
            ends = np.array(ends)
            d = X.distance(ends[:1], ends[1:])[0]
            inside = X.distance(ends, np.broadcast_to(lvls[m].centers[b], ends.shape)) <= lvls[m].eps
            ok &= bool(d > 0 and inside.all())
            pairs += 1
    in_source = bool(F.P.contains_points(lvls[-1].centers, min(lvls[-1].resolution, F.P.depth)).all())
    return PerfectSetDescriptor(F.P.describe(), levels, bounds, bool(nested), chain,
                                bool(chain_ok), pairs, ok, in_source)


def null_cover(F, n):
    """The level-``n`` closed balls as an explicit ``2 eps_n``-cover of the
    last-level centres (each within ``eps_N`` of ``P'``)."""
    lv = F.balls.level(n)
    return ball_cover(F.X, F.centers(F.depth), lv.centers, lv.eps, F.h, 2.0 * lv.eps)
