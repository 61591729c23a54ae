"""Hausdorff functions (gauges), the capped premeasure they induce, and
sample-based checks for finite order and the strict ordering ``g < h``.

Limits cannot be computed from samples, so both checks look at the trend of a
ratio over a dyadic grid ``t_k = cap * 2**-k`` and answer with one of three
verdicts, ``inconclusive`` being a legitimate outcome.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidGauge, InvalidInput

ATOL = 1e-12

FINITE_ORDER = "finite-order"
NOT_FINITE_ORDER = "not-finite-order"
PRECEDES = "precedes"
NOT_PRECEDES = "not-precedes"
INCONCLUSIVE = "inconclusive"

# Final-half decay a ratio must show before ``precedes`` commits to a verdict.
PRECEDES_DECAY = 0.75


class _Empty:
    """Marker for the empty set in :func:`premeasure_eval`."""

    def __repr__(self):
        return "EMPTY"


EMPTY = _Empty()


@dataclass(frozen=True)
class HausdorffFunction:
    """A gauge ``h`` with its cap ``Theta``.

    ``func`` must accept numpy arrays.  ``log_func`` is optional and only used
    where ``h`` underflows to zero in double precision (``exp(-1/t)`` does so
    below ``t ~ 1.4e-3``).
    """

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    cap: float = 1.0
    label: str = "h"
    log_func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.cap > 0:
            raise InvalidInput(f"gauge cap must be positive, got {self.cap}")
        if not math.isfinite(float(self.func(np.asarray([self.cap]))[0])):
            raise InvalidGauge(f"{self.label}: h(cap) is not finite")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.asarray(self.func(t), dtype=np.float64)
        return out if out.ndim else float(out)

    @property
    def cap_value(self):
        return float(self(self.cap))

    def log(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.log_func is not None:
            return np.asarray(self.log_func(t), dtype=np.float64)
        with np.errstate(divide="ignore"):
            return np.log(self(t))


# ------------------------------------------------------------------ gauges


def power(s, cap=1.0):
    """``h(t) = t**s``."""
    s = float(s)
    if s < 0:
        raise InvalidInput(f"power gauge exponent must be >= 0, got {s}")

    def f(t):
        return np.power(t, s)

    def logf(t):
        with np.errstate(divide="ignore"):
            return s * np.log(t)

    return HausdorffFunction(f, cap, f"power:{s!r}", logf)


def exp_inv(cap=1.0):
    """``h(t) = exp(-1/t)``: a gauge that is not of finite order."""

    def f(t):
        with np.errstate(divide="ignore"):
            return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)

    def logf(t):
        with np.errstate(divide="ignore"):
            return np.where(t > 0, -1.0 / np.where(t > 0, t, 1.0), -np.inf)

    return HausdorffFunction(f, cap, "exp-inv", logf)


def dimension_function(t, cap=1.0):
    """The three-piece gauge sitting strictly between ``x**t'`` (t' < t) and ``x**t``.

    ``h(0) = 0``, ``h(x) = x**t * log(1 / x**(t/2))`` on ``(0, e**(-2/t)]`` and
    ``h(x) = e**-2`` beyond; the pieces meet continuously at ``x = e**(-2/t)``.
    """
    t = float(t)
    if not t > 0:
        raise InvalidInput(f"dimension function needs t > 0, got {t}")
    knee = math.exp(-2.0 / t)
    top = math.exp(-2.0)

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        safe = np.where(x > 0, x, 1.0)
        mid = np.power(safe, t) * (0.5 * t) * -np.log(safe)
        return np.where(x <= 0, 0.0, np.where(x <= knee, mid, top))

    def logf(x):
        x = np.asarray(x, dtype=np.float64)
        safe = np.where((x > 0) & (x < 1), x, 0.5)
        with np.errstate(divide="ignore"):
            mid = t * np.log(safe) + np.log(0.5 * t * -np.log(safe))
        return np.where(x <= 0, -np.inf, np.where(x <= knee, mid, -2.0))

    return HausdorffFunction(f, cap, f"dimfun:{t!r}", logf)


_LOG_RATIO = re.compile(r"^log\s*([0-9.]+)\s*/\s*log\s*([0-9.]+)$")


def parse_real(text):
    text = text.strip()
    m = _LOG_RATIO.match(text)
    if m:
        return math.log(float(m.group(1))) / math.log(float(m.group(2)))
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_gauge(spec, cap=1.0):
    """Look up a built-in gauge: ``power:s``, ``dimfun:t`` or ``exp-inv``.

    Real parameters accept decimals, ``a/b`` and ``logA/logB``.
    """
    spec = spec.strip()
    try:
        if spec == "exp-inv":
            return exp_inv(cap)
        kind, _, arg = spec.partition(":")
        if kind == "power" and arg:
            return power(parse_real(arg), cap)
        if kind == "dimfun" and arg:
            return dimension_function(parse_real(arg), cap)
    except ValueError as exc:
        if isinstance(exc, (InvalidInput, InvalidGauge)):
            raise
        raise InvalidInput(f"bad gauge parameter in {spec!r}") from exc
    raise InvalidInput(f"unknown gauge {spec!r}; expected power:s, dimfun:t or exp-inv")


# -------------------------------------------------------------- premeasure


def premeasure_eval(h, d):
    """``min(h(d), h(cap))`` for a set of diameter ``d``; zero for :data:`EMPTY`."""
    if d is EMPTY:
        return 0.0
    d = float(d)
    if not d >= 0:
        raise InvalidInput(f"diameter must be >= 0, got {d}")
    return min(float(h(d)), h.cap_value)


def premeasure_many(h, diameters):
    """Vectorised :func:`premeasure_eval` over an array of diameters."""
    d = np.asarray(diameters, dtype=np.float64)
    if d.size and not (d >= 0).all():
        raise InvalidInput("diameters must be >= 0")
    return np.minimum(h(d), h.cap_value)


# ------------------------------------------------------------ finite order


@dataclass(frozen=True)
class FiniteOrderReport:
    ratio_samples: list
    sup_ratio: float
    verdict: str
    unbounded_trend: bool = False

    def to_dict(self):
        return {
            "ratio_samples": [[t, r] for t, r in self.ratio_samples],
            "sup_ratio": "unbounded trend" if self.unbounded_trend else self.sup_ratio,
            "verdict": self.verdict,
        }


def _dyadic_grid(cap, levels, t_min=0.0):
    ks = np.arange(1, levels + 1)
    t = cap * np.ldexp(1.0, -ks)
    return t[t >= t_min]


def _ratio(h, num_t, den_t):
    """h(num_t)/h(den_t), falling back to log space where h underflows."""
    a = np.asarray(h(num_t), dtype=np.float64)
    b = np.asarray(h(den_t), dtype=np.float64)
    out = np.empty_like(b)
    direct = b > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[direct] = a[direct] / b[direct]
    if (~direct).any():
        if h.log_func is None:
            bad = float(np.asarray(den_t)[~direct][0])
            raise InvalidGauge(f"{h.label} vanishes at t={bad:g} > 0")
        with np.errstate(over="ignore"):
            out[~direct] = np.exp(h.log(num_t[~direct]) - h.log(den_t[~direct]))
    return out


def finite_order_check(h, t_min=1e-12, levels=32):
    """Sample ``h(3t)/h(t)`` on ``t = cap * 2**-k`` (k = 1..levels, t >= t_min).

    The verdict looks at the log-ratios over the final half of the grid:
    flat or decelerating growth means finite order, growth that does not slow
    down (or overflow) means not finite order.
    """
    if not t_min > 0:
        raise InvalidInput("t_min must be positive")
    if levels < 4:
        raise InvalidInput("finite_order_check needs levels >= 4")
    t = _dyadic_grid(h.cap, levels, t_min)
    if t.size < 4:
        raise InvalidInput("fewer than 4 grid points above t_min")
    vals = h(t)
    if (np.asarray(vals) <= 0).any() and h.log_func is None:
        raise InvalidGauge(f"{h.label} is not positive on the sample grid")
    ratios = _ratio(h, 3.0 * t, t)
    samples = [(float(a), float(b)) for a, b in zip(t, ratios)]

    tail = ratios[t.size // 2:]
    if not np.isfinite(tail).all():
        return FiniteOrderReport(samples, math.inf, NOT_FINITE_ORDER, True)
    lr = np.log(tail)
    steps = np.diff(lr)
    scale = ATOL * (1.0 + np.abs(lr[:-1]))
    sup = float(np.max(ratios[np.isfinite(ratios)]))
    if (np.abs(steps) <= scale).all():
        return FiniteOrderReport(samples, sup, FINITE_ORDER)
    mag = np.abs(steps)
    if (steps > 0).all() and (np.diff(steps) >= -scale[:-1]).all():
        return FiniteOrderReport(samples, math.inf, NOT_FINITE_ORDER, True)
    if (np.diff(mag) <= scale[:-1]).all():
        return FiniteOrderReport(samples, sup, FINITE_ORDER)
    return FiniteOrderReport(samples, sup, INCONCLUSIVE)


# ---------------------------------------------------------------- ordering


@dataclass(frozen=True)
class PrecedesReport:
    ratio_samples: list
    verdict: str

    def to_dict(self):
        return {
            "ratio_samples": [[t, r] for t, r in self.ratio_samples],
            "verdict": self.verdict,
        }


def precedes(g, h, levels=40):
    """Decide ``g < h`` (``h(t)/g(t) -> 0``) from dyadic samples.

    ``precedes`` needs the ratio to be non-increasing over the final half of
    the grid and to lose at least a quarter of its value there; a ratio that
    does not drop at all gives ``not-precedes``.
    """
    if levels < 4:
        raise InvalidInput("precedes needs levels >= 4")
    t = _dyadic_grid(min(g.cap, h.cap), levels)
    gv = np.asarray(g(t), dtype=np.float64)
    hv = np.asarray(h(t), dtype=np.float64)
    if (gv <= 0).any() or (hv <= 0).any():
        if g.log_func is None or h.log_func is None:
            raise InvalidGauge("gauge vanishes on the sample grid")
        with np.errstate(over="ignore"):
            ratios = np.exp(h.log(t) - g.log(t))
    else:
        with np.errstate(over="ignore"):
            ratios = hv / gv
    samples = [(float(a), float(b)) for a, b in zip(t, ratios)]
    tail = ratios[t.size // 2:]
    if not np.isfinite(tail).all():
        return PrecedesReport(samples, NOT_PRECEDES)
    first, last = tail[0], tail[-1]
    if last >= first * (1.0 - ATOL):
        return PrecedesReport(samples, NOT_PRECEDES)
    monotone = (np.diff(tail) <= ATOL * np.abs(tail[:-1])).all()
    if monotone and last <= PRECEDES_DECAY * first:
        return PrecedesReport(samples, PRECEDES)
    return PrecedesReport(samples, INCONCLUSIVE)
