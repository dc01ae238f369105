"""Backend selection for the hot decoding kernels.

Numba is used when importable unless ``ST2DSIM_NUMBA`` is set to a false-ish
value (``0``, ``false``, ``no``, ``off``), in which case the pure-numpy
implementations are used everywhere.  The flag is read once at import.
"""

import os

_FALSE = {"0", "false", "no", "off"}

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and os.environ.get("ST2DSIM_NUMBA", "1").strip().lower() not in _FALSE


def njit(fn):
    """``numba.njit(cache=True)`` if numba is available, else identity."""
    if _numba is None:
        return fn
    return _numba.njit(cache=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
