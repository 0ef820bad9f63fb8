"""Numba switch.

Kernels in :mod:`circrank.kernels` come in two flavours: scalar loops compiled
with numba, and vectorised numpy.  Setting ``CIRCRANK_NO_NUMBA=1`` (or not
having numba installed) selects the numpy path everywhere.
"""

import os

try:  # pragma: no cover - depends on environment
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
NUMBA_DISABLED = os.environ.get("CIRCRANK_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = NUMBA_AVAILABLE and not NUMBA_DISABLED


def njit(func):
    """Compile ``func`` with numba when available; otherwise return it unchanged.

    The undecorated function stays reachable as ``func.py_func`` in both cases so
    tests can exercise the loop implementation directly.
    """
    if NUMBA_AVAILABLE:
        return numba.njit(cache=True, nogil=True)(func)
    func.py_func = func
    return func
