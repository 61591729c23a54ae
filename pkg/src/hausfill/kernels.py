"""Hot loops, each in a numba flavour and a numpy flavour.

The public functions at the bottom dispatch on :func:`hausfill._jit.backend`.
Inputs are coerced to contiguous int64/float64 arrays before hitting either
path so that both see identical data.
"""

import numpy as np

from ._jit import backend, njit

# ---------------------------------------------------------------- Hilbert


@njit
def _hilbert_d2xy_nb(d, order):
    n = d.shape[0]
    xs = np.empty(n, np.int64)
    ys = np.empty(n, np.int64)
    side = np.int64(1) << order
    for i in range(n):
        t = d[i]
        x = np.int64(0)
        y = np.int64(0)
        s = np.int64(1)
        while s < side:
            rx = (t >> 1) & 1
            ry = (t ^ rx) & 1
            if ry == 0:
                if rx == 1:
                    x = s - 1 - x
                    y = s - 1 - y
                x, y = y, x
            x += s * rx
            y += s * ry
            t >>= 2
            s <<= 1
        xs[i] = x
        ys[i] = y
    return xs, ys


def _hilbert_d2xy_np(d, order):
    t = d.copy()
    x = np.zeros_like(d)
    y = np.zeros_like(d)
    s = 1
    side = 1 << order
    while s < side:
        rx = (t >> 1) & 1
        ry = (t ^ rx) & 1
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x = x + s * rx
        y = y + s * ry
        t = t >> 2
        s <<= 1
    return x, y


@njit
def _hilbert_xy2d_nb(x, y, order):
    n = x.shape[0]
    out = np.empty(n, np.int64)
    side = np.int64(1) << order
    for i in range(n):
        xi = x[i]
        yi = y[i]
        d = np.int64(0)
        s = side >> 1
        while s > 0:
            rx = np.int64(1) if (xi & s) > 0 else np.int64(0)
            ry = np.int64(1) if (yi & s) > 0 else np.int64(0)
            d += s * s * ((3 * rx) ^ ry)
            if ry == 0:
                if rx == 1:
                    xi = side - 1 - xi
                    yi = side - 1 - yi
                xi, yi = yi, xi
            s >>= 1
        out[i] = d
    return out


def _hilbert_xy2d_np(x, y, order):
    x = x.copy()
    y = y.copy()
    d = np.zeros_like(x)
    side = 1 << order
    s = side >> 1
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, side - 1 - x, x)
        y = np.where(flip, side - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d


# ------------------------------------------------------- nearest neighbour


@njit
def _nearest_nb(a, b, tol):
    n = a.shape[0]
    m = b.shape[0]
    dim = a.shape[1]
    idx = np.empty(n, np.int64)
    dist = np.empty(n, np.float64)
    for i in range(n):
        best = np.inf
        # first pass: minimum distance
        for j in range(m):
            acc = 0.0
            for k in range(dim):
                diff = a[i, k] - b[j, k]
                acc += diff * diff
            dd = np.sqrt(acc)
            if dd < best:
                best = dd
        # second pass: lowest index within tolerance of the minimum
        for j in range(m):
            acc = 0.0
            for k in range(dim):
                diff = a[i, k] - b[j, k]
                acc += diff * diff
            dd = np.sqrt(acc)
            if dd <= best + tol:
                idx[i] = j
                dist[i] = dd
                break
    return idx, dist


def _nearest_np(a, b, tol, chunk=2048):
    n = a.shape[0]
    idx = np.empty(n, np.int64)
    dist = np.empty(n, np.float64)
    for start in range(0, n, chunk):
        blk = a[start:start + chunk]
        diff = blk[:, None, :] - b[None, :, :]
        dd = np.sqrt(np.sum(diff * diff, axis=2))
        best = dd.min(axis=1)
        j = np.argmax(dd <= (best + tol)[:, None], axis=1)
        idx[start:start + chunk] = j
        dist[start:start + chunk] = dd[np.arange(blk.shape[0]), j]
    return idx, dist


# ------------------------------------------------- greedy separated subset


@njit
def _greedy_separated_nb(points, sep, fixed, limit, tol):
    n = points.shape[0]
    dim = points.shape[1]
    nfix = fixed.shape[0]
    keep = np.empty(n, np.int64)
    nkeep = 0
    thresh = sep - tol
    for i in range(n):
        if limit >= 0 and nkeep >= limit:
            break
        ok = True
        for j in range(nfix):
            acc = 0.0
            for k in range(dim):
                diff = points[i, k] - fixed[j, k]
                acc += diff * diff
            if np.sqrt(acc) < thresh:
                ok = False
                break
        if not ok:
            continue
        for jj in range(nkeep):
            j = keep[jj]
            acc = 0.0
            for k in range(dim):
                diff = points[i, k] - points[j, k]
                acc += diff * diff
            if np.sqrt(acc) < thresh:
                ok = False
                break
        if ok:
            keep[nkeep] = i
            nkeep += 1
    return keep[:nkeep].copy()


def _greedy_separated_np(points, sep, fixed, limit, tol):
    thresh = sep - tol
    if fixed.shape[0]:
        dfix = np.sqrt(((points[:, None, :] - fixed[None, :, :]) ** 2).sum(axis=2))
        alive = (dfix >= thresh).all(axis=1)
    else:
        alive = np.ones(points.shape[0], dtype=bool)
    keep = []
    kept = np.empty((0, points.shape[1]))
    for i in np.flatnonzero(alive):
        if 0 <= limit <= len(keep):
            break
        if kept.shape[0]:
            d = np.sqrt(((kept - points[i]) ** 2).sum(axis=1))
            if (d < thresh).any():
                continue
        keep.append(i)
        kept = points[keep]
    return np.asarray(keep, dtype=np.int64)


# ------------------------------------------------------- pairwise minimum


@njit
def _min_pairwise_nb(points):
    n = points.shape[0]
    dim = points.shape[1]
    best = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(dim):
                diff = points[i, k] - points[j, k]
                acc += diff * diff
            if acc < best:
                best = acc
    return np.sqrt(best)


def _min_pairwise_np(points, chunk=1024):
    n = points.shape[0]
    best = np.inf
    for start in range(0, n, chunk):
        blk = points[start:start + chunk]
        d2 = ((blk[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        rows = np.arange(blk.shape[0])
        cols = start + rows
        # only count pairs (i, j) with j > i
        mask = np.arange(n)[None, :] > cols[:, None]
        if mask.any():
            best = min(best, float(d2[mask].min()))
    return float(np.sqrt(best))


# ---------------------------------------------------------- interval marks


@njit
def _mark_ranges_nb(lo, hi, size):
    mask = np.zeros(size, np.bool_)
    for i in range(lo.shape[0]):
        a = max(lo[i], 0)
        b = min(hi[i], size - 1)
        for j in range(a, b + 1):
            mask[j] = True
    return mask


def _mark_ranges_np(lo, hi, size):
    a = np.clip(lo, 0, size)
    b = np.clip(hi + 1, 0, size)
    ok = b > a
    diff = np.zeros(size + 1, np.int64)
    np.add.at(diff, a[ok], 1)
    np.add.at(diff, b[ok], -1)
    return np.cumsum(diff[:-1]) > 0


# ------------------------------------------------------------- dispatchers


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _f64_2d(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return a


def hilbert_d2xy(d, order):
    """Cell coordinates of Hilbert indices ``d`` on the ``2**order`` grid."""
    d = _i64(d)
    if backend() == "numba":
        return _hilbert_d2xy_nb(d, int(order))
    return _hilbert_d2xy_np(d, int(order))


def hilbert_xy2d(x, y, order):
    """Hilbert index of integer cell coordinates; inverse of :func:`hilbert_d2xy`."""
    x, y = _i64(x), _i64(y)
    if backend() == "numba":
        return _hilbert_xy2d_nb(x, y, int(order))
    return _hilbert_xy2d_np(x, y, int(order))


def nearest(a, b, tol=1e-12):
    """Index of and distance to the nearest row of ``b`` for each row of ``a``.

    Ties within ``tol`` resolve to the lowest index in ``b``.
    """
    a, b = _f64_2d(a), _f64_2d(b)
    if b.shape[0] == 0:
        raise ValueError("nearest() needs at least one target point")
    if backend() == "numba":
        return _nearest_nb(a, b, float(tol))
    return _nearest_np(a, b, float(tol))


def greedy_separated(points, sep, fixed=None, limit=-1, tol=1e-12):
    """Greedy scan keeping points at distance >= sep from everything kept so far.

    ``fixed`` points are obstacles that are never returned; ``limit`` caps the
    number of kept points (negative means unlimited).  Returns kept indices in
    scan order.
    """
    points = _f64_2d(points)
    if fixed is None:
        fixed = np.empty((0, points.shape[1]))
    fixed = _f64_2d(fixed)
    if backend() == "numba":
        return _greedy_separated_nb(points, float(sep), fixed, int(limit), float(tol))
    return _greedy_separated_np(points, float(sep), fixed, int(limit), float(tol))


def min_pairwise_distance(points):
    """Smallest Euclidean distance between two distinct rows (inf for < 2 rows)."""
    points = _f64_2d(points)
    if points.shape[0] < 2:
        return float("inf")
    if backend() == "numba":
        return float(_min_pairwise_nb(points))
    return _min_pairwise_np(points)


def mark_ranges(lo, hi, size):
    """Boolean mask of length ``size`` set on every closed range ``[lo_i, hi_i]``."""
    lo, hi = _i64(lo), _i64(hi)
    if backend() == "numba":
        return _mark_ranges_nb(lo, hi, int(size))
    return _mark_ranges_np(lo, hi, int(size))
