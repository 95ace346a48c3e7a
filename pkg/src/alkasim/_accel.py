"""JIT toggle for the numerical kernels.

The hot path (residual evaluation inside the Newton loop) is written as
scalar float functions in :mod:`alkasim.kernels`.  By default they are
compiled with numba.  Setting the environment variable

    ALKASIM_DISABLE_JIT=1

before import selects the pure-Python/numpy fallback, which produces
bit-identical results but runs slower.  The flag is read once at import.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}

JIT_DISABLED = os.environ.get("ALKASIM_DISABLE_JIT", "").strip().lower() in _TRUTHY

if not JIT_DISABLED:
    try:
        from numba import njit as _njit
        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAS_NUMBA = False
else:
    HAS_NUMBA = False

JIT_ENABLED = HAS_NUMBA and not JIT_DISABLED


def jitted(func):
    """Compile ``func`` with numba when enabled, else return it unchanged.

    fastmath stays off so both paths agree bit-for-bit.
    """
    if JIT_ENABLED:
        return _njit(cache=True, fastmath=False)(func)
    return func


def python_impl(func):
    """Return the uncompiled Python implementation of a kernel."""
    return getattr(func, "py_func", func)
