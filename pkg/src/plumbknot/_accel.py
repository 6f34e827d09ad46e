"""Optional numba acceleration.

Set ``PLUMBKNOT_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. to
cross-check kernels or to run where numba is unavailable.
"""
import os

_flag = os.environ.get("PLUMBKNOT_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

USE_NUMBA = _numba is not None and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity decorator otherwise."""
    if USE_NUMBA:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
