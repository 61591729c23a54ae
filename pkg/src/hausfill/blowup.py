"""Numerical witnesses on classical curves: the Hilbert curve's Hölder
exponent, exact dyadic preimage bookkeeping, and a null parameter set whose
image ``C x [0, 1]`` has dimension ``1 + dim C``.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import kernels
from .covers import DimensionEstimate, fit_dimension
from .errors import DegenerateCurve, DepthExceeded, InvalidInput, ResolutionExceeded

MAX_DEPTH = 26
MAX_DEMO_DEPTH = 12


# ------------------------------------------------------------------ curves


class DyadicCurve:
    """A curve ``[0, 1] -> [0, 1]**2`` evaluated at a finite depth."""

    name = "curve"

    def eval(self, t, depth):
        raise NotImplementedError

    def cell_map(self, depth):
        raise InvalidInput(f"{self.name} has no dyadic cell map")


def _check_depth(depth):
    depth = int(depth)
    if depth < 0:
        raise InvalidInput("depth must be >= 0")
    if depth > MAX_DEPTH:
        raise DepthExceeded(f"depth {depth} exceeds {MAX_DEPTH}")
    return depth


class HilbertCurve(DyadicCurve):
    """The U-order Hilbert curve starting in the ``(0, 0)`` corner square.

    At depth ``k`` parameter cell ``[d 4**-k, (d+1) 4**-k]`` maps to the square
    with integer coordinates ``hilbert_d2xy(d, k)``.
    """

    name = "hilbert"

    def cell_map(self, depth):
        depth = _check_depth(depth)
        if depth > 13:
            raise ResolutionExceeded("cell maps are materialised up to depth 13")
        x, y = kernels.hilbert_d2xy(np.arange(4 ** depth, dtype=np.int64), depth)
        return np.stack([x, y], axis=1)

    def cell_of(self, t, depth):
        t = np.asarray(t, dtype=np.float64)
        if ((t < 0) | (t > 1)).any():
            raise InvalidInput("t must lie in [0, 1]")
        n = 4 ** depth
        # t * 4**k is exact in binary floating point
        return np.minimum(np.floor(t * n).astype(np.int64), n - 1)

    def eval(self, t, depth):
        depth = _check_depth(depth)
        x, y = kernels.hilbert_d2xy(self.cell_of(np.atleast_1d(t), depth), depth)
        side = math.ldexp(1.0, -depth)
        return np.stack([(x + 0.5) * side, (y + 0.5) * side], axis=1)


@dataclass(frozen=True)
class FunctionCurve(DyadicCurve):
    """A closed-form curve; depth is ignored."""

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    name: str = "function"

    def eval(self, t, depth=0):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if ((t < 0) | (t > 1)).any():
            raise InvalidInput("t must lie in [0, 1]")
        return np.asarray(self.func(t), dtype=np.float64).reshape(t.size, 2)


def identity_curve():
    return FunctionCurve(lambda t: np.stack([t, np.zeros_like(t)], axis=1), "identity")


def sqrt_curve():
    return FunctionCurve(lambda t: np.stack([np.sqrt(t), np.zeros_like(t)], axis=1), "sqrt")


def constant_curve(point=(0.5, 0.5)):
    p = np.asarray(point, dtype=np.float64)
    return FunctionCurve(lambda t: np.repeat(p.reshape(1, 2), t.size, axis=0), "constant")


def parse_curve(spec):
    table = {"hilbert": HilbertCurve, "identity": identity_curve, "sqrt": sqrt_curve,
             "constant": constant_curve}
    if spec not in table:
        raise InvalidInput(f"unknown curve {spec!r}; expected one of {sorted(table)}")
    return table[spec]()


def hilbert_eval(t, depth):
    """Centre of the depth-``depth`` Hilbert square assigned to ``t``."""
    pts = HilbertCurve().eval(t, depth)
    return pts[0] if np.ndim(t) == 0 else pts


# ----------------------------------------------------------------- Hölder


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    lower: float
    upper: float
    stderr: float
    r2: float
    scales: list
    pairs: int

    def to_dict(self):
        return {"alpha": self.alpha, "band": [self.lower, self.upper], "stderr": self.stderr,
                "r2": self.r2, "pairs": self.pairs,
                "scales": [[d, w] for d, w in self.scales]}


def holder_exponent(curve, depth, pairs, seed=0):
    """Slope of ``log omega(Delta)`` against ``log Delta`` over dyadic scales.

    ``omega(Delta)`` is the largest sampled ``|F(t + Delta) - F(t)|`` over grid
    starts ``t = i Delta``; the first and last starts are always included, the
    rest are drawn with a seeded generator.  The band is ``slope +- 2 stderr``.
    """
    if pairs < 1000:
        raise InvalidInput("holder_exponent needs at least 1000 pairs")
    depth = _check_depth(depth)
    top = max(2 * depth - 2, 6)
    js = list(range(1, top + 1))
    per = max(2, pairs // len(js))
    rng = np.random.default_rng(seed)
    rows = []
    used = 0
    for j in js:
        delta = math.ldexp(1.0, -j)
        last = (1 << j) - 1
        if last + 1 <= per:
            i = np.arange(last + 1)
        else:
            i = np.unique(np.concatenate([[0, last], rng.integers(0, last + 1, per - 2)]))
        t = i * delta
        a = curve.eval(t, depth)
        b = curve.eval(t + delta, depth)
        w = float(np.sqrt(((a - b) ** 2).sum(axis=1)).max())
        used += i.size
        if w <= 0:
            raise DegenerateCurve(f"{curve.name}: no movement at scale 2**-{j}")
        rows.append((delta, w))
    x = np.log([d for d, _ in rows])
    y = np.log([w for _, w in rows])
    fit = stats.linregress(x, y)
    se = float(fit.stderr)
    return HolderEstimate(float(fit.slope), float(fit.slope - 2 * se), float(fit.slope + 2 * se),
                          se, float(fit.rvalue ** 2), rows, used)


# --------------------------------------------------------------- preimage


@dataclass(frozen=True)
class ParameterUnion:
    """Disjoint closed parameter intervals with rational endpoints."""

    intervals: list
    depth: int

    @property
    def length(self):
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def to_dict(self):
        return {"depth": self.depth, "length": str(self.length),
                "intervals": [[str(a), str(b)] for a, b in self.intervals]}


def preimage(curve, cells, depth):
    """Union of the parameter intervals whose Hilbert squares are in ``cells``."""
    if not isinstance(curve, HilbertCurve):
        raise InvalidInput("preimages are defined for the Hilbert curve")
    depth = _check_depth(depth)
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    side = 1 << depth
    if cells.size and ((cells < 0) | (cells >= side)).any():
        raise InvalidInput(f"cell coordinates do not fit depth {depth}")
    if cells.shape[0] == 0:
        return ParameterUnion([], depth)
    d = np.unique(kernels.hilbert_xy2d(cells[:, 0], cells[:, 1], depth))
    breaks = np.flatnonzero(np.diff(d) != 1)
    starts = np.concatenate([[d[0]], d[breaks + 1]])
    ends = np.concatenate([d[breaks], [d[-1]]]) + 1
    den = 4 ** depth
    return ParameterUnion([(Fraction(int(a), den), Fraction(int(b), den))
                           for a, b in zip(starts, ends)], depth)


# ------------------------------------------------------------ Cantor target


@dataclass(frozen=True)
class CantorColumns:
    """Level-``m`` intervals of the two-piece Cantor set with ratio ``r``.

    When ``1/r`` is an integer ``q`` the left endpoints are the integers
    ``A / q**m`` with base-``q`` digits in ``{0, q-1}`` and all counting is exact.
    """

    ratio: float
    level: int
    q: Optional[int]

    def _numerators(self):
        a = np.zeros(1, dtype=np.int64)
        for _ in range(self.level):
            a = np.concatenate([a * self.q, a * self.q + (self.q - 1)])
        return np.sort(a)

    def _float_left(self):
        a = np.zeros(1)
        scale = 1.0
        for _ in range(self.level):
            a = np.concatenate([a, a + (1.0 - self.ratio) * scale])
            scale *= self.ratio
        return np.sort(a), scale

    def column_ranges(self, j):
        """Inclusive dyadic column ranges at scale ``2**-j`` covering the intervals."""
        n = 1 << j
        if self.q is not None:
            a = self._numerators()
            den = self.q ** self.level
            lo = (a * n) // den
            hi = -((-(a + 1) * n) // den) - 1
        else:
            left, length = self._float_left()
            lo = np.floor(left * n).astype(np.int64)
            hi = np.ceil((left + length) * n).astype(np.int64) - 1
        return np.clip(lo, 0, n - 1), np.clip(np.maximum(hi, lo), 0, n - 1)

    def column_count(self, j):
        lo, hi = self.column_ranges(j)
        return int(kernels.mark_ranges(lo, hi, 1 << j).sum())


def _exact_q(r):
    q = round(1.0 / r)
    return q if q >= 3 and abs(1.0 / r - q) < 1e-9 else None


def cantor_ratio(s_dim):
    """Ratio ``r`` with ``log 2 / log(1/r) = s_dim``."""
    return 2.0 ** (-1.0 / s_dim)


def hilbert_depth_for(s_dim, level):
    """Dyadic depth whose squares are no wider than the level-``level`` intervals."""
    if s_dim == 0:
        return level
    return math.ceil(level * math.log2(1.0 / cantor_ratio(s_dim)) - 1e-9)


@dataclass(frozen=True)
class BlowupReport:
    s_dim: float
    ratio: float
    depth: int
    hilbert_depths: list
    preimage_measure_bounds: list
    box_counts: list
    image_dimension: DimensionEstimate
    verdict: str

    @property
    def bounds(self):
        return [b for _, b in self.preimage_measure_bounds]

    def to_dict(self):
        return {
            "s_dim": self.s_dim, "ratio": self.ratio, "depth": self.depth,
            "hilbert_depths": self.hilbert_depths,
            "preimage_measure_bounds": [[m, float(b), str(b)]
                                        for m, b in self.preimage_measure_bounds],
            "image_dimension": self.image_dimension.to_dict(),
            "expected_dimension": 1.0 + self.s_dim,
            "verdict": self.verdict,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["depth", "preimage_bound", "image_box_count"])
        for (m, b), c in zip(self.preimage_measure_bounds, self.box_counts):
            w.writerow([m, repr(float(b)), c])
        return buf.getvalue()


def blowup_demo(s_dim, depth, depth_lo=1):
    """Preimage cover bounds and image dimension for ``T = C x [0, 1]``.

    At Cantor level ``m`` the target is covered by the dyadic squares (depth
    ``k_m``) meeting ``C_m x [0, 1]``; their Hilbert preimage has length
    ``columns / 2**k_m`` exactly, an upper bound for the length of the
    preimage of ``T``.  ``s_dim = 0`` is the single point ``{1/3}``.
    """
    s_dim = float(s_dim)
    if not 0 <= s_dim < 1:
        raise InvalidInput("s_dim must lie in [0, 1)")
    depth = int(depth)
    if depth > MAX_DEMO_DEPTH:
        raise DepthExceeded(f"depth {depth} exceeds {MAX_DEMO_DEPTH}")
    if not 1 <= depth_lo <= depth:
        raise InvalidInput("need 1 <= depth_lo <= depth")
    k_final = hilbert_depth_for(s_dim, depth)
    if k_final > MAX_DEPTH:
        raise ResolutionExceeded(f"Hilbert depth {k_final} exceeds {MAX_DEPTH}")

    def columns(level, j):
        if s_dim == 0:
            return 1  # 1/3 is never a dyadic rational, so one column meets it
        r = cantor_ratio(s_dim)
        return CantorColumns(r, level, _exact_q(r)).column_count(j)

    bounds, counts, kdepths = [], [], []
    for m in range(depth_lo, depth + 1):
        k = hilbert_depth_for(s_dim, m)
        c = columns(m, k)
        kdepths.append(k)
        bounds.append((m, Fraction(c, 1 << k)))
        counts.append(c << k)

    js = list(range(2, k_final + 1))
    if len(js) < 4:
        raise InvalidInput("depth too small for a dimension fit")
    boxes = [columns(depth, j) << j for j in js]
    dim = fit_dimension([math.ldexp(1.0, -j) for j in js], boxes)

    values = [b for _, b in bounds]
    monotone = all(b <= a for a, b in zip(values, values[1:]))
    verdict = (f"preimage length bounds {'non-increasing' if monotone else 'NOT monotone'}, "
               f"final {float(values[-1]):.4g}; image box dimension {dim.slope:.4f} "
               f"(r2 {dim.r2:.4f}) against {1.0 + s_dim:.4f}")
    return BlowupReport(s_dim, cantor_ratio(s_dim) if s_dim else 0.0, depth, kdepths,
                        bounds, counts, dim, verdict)
