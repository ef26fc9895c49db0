"""Numba gate for the hot kernels.

The two inner loops that dominate runtime (Numerov shooting sweep,
Crank-Nicolson tridiagonal march) are written once in plain loop form and
compiled with @njit when numba is importable.  Setting
SCHRODHEAT_DISABLE_NUMBA=1 forces the fallback path (pure loop or LAPACK
banded solves); benchmarks/bench_accel.py times both.
"""

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SCHRODHEAT_DISABLE_NUMBA", "0") != "1"


def maybe_njit(fn):
    """Compile fn with numba when the accelerated path is active."""
    if USE_NUMBA:
        return njit(cache=True)(fn)
    return fn
