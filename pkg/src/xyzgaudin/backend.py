"""Kernel backend selection.

The theta-series and Bethe-system kernels exist twice: a numba @njit
implementation (fast scalar loops) and a pure-numpy vectorized fallback.
Selection happens once at import time from the environment variable

    XYZGAUDIN_BACKEND = auto | numba | numpy      (default: auto)

"auto" uses numba when it imports cleanly and falls back to numpy otherwise.
``benchmarks/bench_backends.py`` compares the two.
"""

import os
import warnings

_CHOICE = os.getenv("XYZGAUDIN_BACKEND", "auto").strip().lower()

if _CHOICE in ("0", "numpy", "off", "false"):
    _use_numba = False
elif _CHOICE in ("numba", "1", "on", "true"):
    _use_numba = True
else:
    if _CHOICE != "auto":
        warnings.warn(f"unknown XYZGAUDIN_BACKEND={_CHOICE!r}, using 'auto'")
    _use_numba = None  # probe

if _use_numba is not False:
    try:
        import numba  # noqa: F401
        _active = "numba"
    except Exception:
        if _use_numba is True:
            raise
        _active = "numpy"
else:
    _active = "numpy"


def active():
    """Name of the kernel backend in use: 'numba' or 'numpy'."""
    return _active
