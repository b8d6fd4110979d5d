"""Backend selection for the hot kernels.

Set ``GRIDLOCK_NUMBA=0`` to force the pure-numpy paths even when numba is
importable. The choice is made once, at import time.
"""

import os

_flag = os.environ.get("GRIDLOCK_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    if not _wanted:
        raise ImportError("disabled by GRIDLOCK_NUMBA")
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    _njit = None


def njit(fn):
    """``numba.njit(cache=True)`` when available, otherwise a no-op."""
    if _njit is None:
        return fn
    return _njit(cache=True)(fn)


BACKEND = "numba" if HAS_NUMBA else "numpy"
