"""Hot inner loops: Numerov shooting sweeps and Crank-Nicolson marches.

Both are sequential recurrences that vectorization cannot touch, so they are
the numba surface of the package (see _accel).  The CN fallback path uses
LAPACK banded Cholesky solves per step instead of the compiled Thomas loop;
the Numerov fallback runs the same source uncompiled (5 flops per step).
"""

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from ._accel import USE_NUMBA, maybe_njit


# ---------------------------------------------------------------------------
# Numerov integration of w'' = Q(r) w on a uniform mesh.
# t[i] = h^2 Q(r_i) / 12 is precomputed (vectorized) by the caller.


def _numerov_forward(t, w0, w1, i_last):
    """March w from indices (0, 1) up to index i_last >= 2.

    Returns (w[i_last-2], w[i_last-1], w[i_last], sign_changes).
    """
    wp = w0
    wa = w0
    wb = w1
    nodes = 0
    for i in range(1, i_last):
        wc = ((2.0 + 10.0 * t[i]) * wb - (1.0 - t[i - 1]) * wa) / (1.0 - t[i + 1])
        if wc * wb < 0.0:
            nodes += 1
        wp = wa
        wa = wb
        wb = wc
    return wp, wa, wb, nodes


def _numerov_backward(t, wn, wn1, i_first):
    """March w from the top two indices (n, n-1) down to index i_first <= n-2.

    Returns (w[i_first], w[i_first+1], w[i_first+2], sign_changes).
    """
    n = len(t) - 1
    wp = wn       # trails as w[i+1]
    wa = wn       # w[i+1] in the step below
    wb = wn1      # w[i]
    nodes = 0
    for i in range(n - 1, i_first, -1):
        wc = ((2.0 + 10.0 * t[i]) * wb - (1.0 - t[i + 1]) * wa) / (1.0 - t[i - 1])
        if wc * wb < 0.0:
            nodes += 1
        wp = wa
        wa = wb
        wb = wc
    return wb, wa, wp, nodes


numerov_forward = maybe_njit(_numerov_forward)
numerov_backward = maybe_njit(_numerov_backward)


# ---------------------------------------------------------------------------
# Theta-scheme march for M du/dt = -K u with constant dt:
#     (M + theta dt K) u_new = (M - (1-theta) dt K) u_old
# Matrices are symmetric tridiagonal: (diag, off).


def _thomas_march(ad, au, bd, bu, u, nsteps):
    """nsteps of  A u_new = B u_old  with A, B symmetric tridiagonal.

    A is factored once (no pivoting; A is SPD here).  Modifies u in place.
    """
    n = len(u)
    cp = np.empty(n)
    cp[0] = ad[0]
    low = np.empty(n - 1)
    for i in range(1, n):
        low[i - 1] = au[i - 1] / cp[i - 1]
        cp[i] = ad[i] - low[i - 1] * au[i - 1]
    rhs = np.empty(n)
    for _ in range(nsteps):
        rhs[0] = bd[0] * u[0] + bu[0] * u[1]
        for i in range(1, n - 1):
            rhs[i] = bu[i - 1] * u[i - 1] + bd[i] * u[i] + bu[i] * u[i + 1]
        rhs[n - 1] = bu[n - 2] * u[n - 2] + bd[n - 1] * u[n - 1]
        for i in range(1, n):
            rhs[i] -= low[i - 1] * rhs[i - 1]
        u[n - 1] = rhs[n - 1] / cp[n - 1]
        for i in range(n - 2, -1, -1):
            u[i] = (rhs[i] - au[i] * u[i + 1]) / cp[i]
    return u


_thomas_march_nb = maybe_njit(_thomas_march)


def _march_scipy(ad, au, bd, bu, u, nsteps):
    ab = np.zeros((2, len(u)))
    ab[0, 1:] = au
    ab[1, :] = ad
    cb = cholesky_banded(ab)
    for _ in range(nsteps):
        rhs = bd * u
        rhs[:-1] += bu * u[1:]
        rhs[1:] += bu * u[:-1]
        u = cho_solve_banded((cb, False), rhs)
    return u


def theta_march(md, me, kd, ke, u, dt, nsteps, theta=0.5):
    """Advance u by nsteps steps of size dt under the (M, K) theta scheme."""
    ad = md + theta * dt * kd
    au = me + theta * dt * ke
    bd = md - (1.0 - theta) * dt * kd
    bu = me - (1.0 - theta) * dt * ke
    u = np.ascontiguousarray(u, dtype=float).copy()
    if USE_NUMBA:
        return _thomas_march_nb(ad, au, bd, bu, u, nsteps)
    return _march_scipy(ad, au, bd, bu, u, nsteps)
