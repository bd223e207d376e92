"""Backend selection for the compiled kernels.

Set ``SDNLM_DISABLE_NUMBA=1`` before import to run the pure-numpy path.
"""
import os

_DISABLED = os.environ.get("SDNLM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache``/``nogil`` on; a no-op decorator without numba."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return _numba_njit(*args, **kwargs)


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
