"""Optional numba acceleration.

Set ``DBEXPLAIN_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels (useful for debugging and for the benchmark comparison).
"""
import os

_DISABLED = os.environ.get("DBEXPLAIN_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("disabled by DBEXPLAIN_DISABLE_NUMBA")
    import numba

    NUMBA_AVAILABLE = True
except ImportError:
    numba = None
    NUMBA_AVAILABLE = False


def njit(fallback):
    """Compile the decorated function with numba, or use ``fallback``."""

    def decorator(func):
        if NUMBA_AVAILABLE:
            return numba.njit(cache=True)(func)
        return fallback

    return decorator


def backend():
    return "numba" if NUMBA_AVAILABLE else "numpy"
