"""Time each numeric kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude the first (compiling) call.  Outputs of the two
backends are compared before timing.
"""

import argparse
import timeit

import numpy as np

from hausfill import kernels, use_backend
from hausfill._jit import HAS_NUMBA


def cases(rng):
    order = 10
    d = np.arange(1 << (2 * order), dtype=np.int64)
    x, y = kernels.hilbert_d2xy(d, order)
    a = rng.uniform(size=(20_000, 2))
    b = rng.uniform(size=(2_000, 2))
    pts = rng.uniform(size=(6_000, 2))
    lo = np.sort(rng.integers(0, 1 << 20, 4_000))
    hi = lo + rng.integers(0, 256, lo.size)
    return {
        "hilbert_d2xy": lambda: kernels.hilbert_d2xy(d, order),
        "hilbert_xy2d": lambda: kernels.hilbert_xy2d(x, y, order),
        "nearest": lambda: kernels.nearest(a, b),
        "greedy_separated": lambda: kernels.greedy_separated(pts, 0.01),
        "min_pairwise_distance": lambda: kernels.min_pairwise_distance(pts[:3_000]),
        "mark_ranges": lambda: kernels.mark_ranges(lo, hi, 1 << 21),
    }


def same(x, y):
    if isinstance(x, tuple):
        return all(same(u, v) for u, v in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if HAS_NUMBA else ["numpy"]
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  agree")
    for name, fn in cases(np.random.default_rng(0)).items():
        times, outs = {}, {}
        for b in backends:
            with use_backend(b):
                outs[b] = fn()
                times[b] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        agree = same(*outs.values()) if len(outs) == 2 else True
        speed = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        print(f"{name:<24}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
              + f"{speed:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
