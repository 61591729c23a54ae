"""Backend selection for the numeric kernels.

The numba path is used when numba imports and ``HAUSFILL_JIT`` is not set to
``0``/``false``/``off``.  Every kernel also has a pure-numpy twin, and the two
are expected to agree exactly; :func:`use_backend` switches at runtime, which
is how the tests and the benchmark exercise both.
"""

import contextlib
import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def _env_wants_jit():
    raw = os.environ.get("HAUSFILL_JIT", "1").strip().lower()
    return raw not in ("0", "false", "off", "no")


_state = {"backend": "numba" if (HAS_NUMBA and _env_wants_jit()) else "numpy"}


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when numba is present, identity otherwise."""
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)

    def wrap(f):
        if not HAS_NUMBA:
            return f
        return numba.njit(**opts)(f)

    if func is not None:
        return wrap(func)
    return wrap


def backend():
    return _state["backend"]


def set_backend(name):
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not importable")
    _state["backend"] = name


@contextlib.contextmanager
def use_backend(name):
    old = backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)
