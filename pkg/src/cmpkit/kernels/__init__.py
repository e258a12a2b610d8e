"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``CMPKIT_NUMBA`` is not set to ``0``/``false``/``off``. Both
implementations are importable directly (``numpy_impl``, ``numba_impl``)
so tests and benchmarks can compare them.
"""

import os

from . import numpy_impl

try:
    from . import numba_impl
except ImportError:  # numba missing or broken
    numba_impl = None


def _numba_requested():
    flag = os.environ.get("CMPKIT_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


USE_NUMBA = numba_impl is not None and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"

_impl = numba_impl if USE_NUMBA else numpy_impl

demag_tensor_points = _impl.demag_tensor_points
lorentzian_grid = _impl.lorentzian_grid
column_peaks = _impl.column_peaks

__all__ = [
    "BACKEND",
    "USE_NUMBA",
    "column_peaks",
    "demag_tensor_points",
    "lorentzian_grid",
    "numba_impl",
    "numpy_impl",
]
