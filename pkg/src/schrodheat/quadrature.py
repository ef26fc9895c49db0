"""Adaptive quadrature with a certified error estimate.

Embedded Gauss-Legendre pair (10 and 21 points) on a stack of subintervals;
the worst intervals are bisected until the summed |G21 - G10| estimate meets
the tolerance.  Integrands here are smooth, so this converges in a handful
of rounds; non-convergence raises QuadratureError carrying the achieved
estimate instead of silently returning.
"""

import numpy as np

from .errors import QuadratureError

_XLO, _WLO = np.polynomial.legendre.leggauss(10)
_XHI, _WHI = np.polynomial.legendre.leggauss(21)


def _panels(f, a, b):
    """High/low rule values of f on each [a_i, b_i]; returns (hi, err)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xhi = mid[:, None] + half[:, None] * _XHI[None, :]
    xlo = mid[:, None] + half[:, None] * _XLO[None, :]
    hi = half * (f(xhi.ravel()).reshape(xhi.shape) @ _WHI)
    lo = half * (f(xlo.ravel()).reshape(xlo.shape) @ _WLO)
    return hi, np.abs(hi - lo)


def integrate(f, a, b, rtol=1e-10, atol=1e-300, max_rounds=40, max_panels=20000):
    """Integral of f over [a, b] with total error estimate <= rtol*|I| + atol.

    f must accept a 1-D numpy array.  Returns (value, error_estimate).
    """
    if b < a:
        raise ValueError(f"inverted interval [{a}, {b}]")
    if b == a:
        return 0.0, 0.0
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    vals, errs = _panels(f, lo, hi)
    for _ in range(max_rounds):
        total = vals.sum()
        budget = max(rtol * abs(total), atol)
        if errs.sum() <= budget:
            return float(total), float(errs.sum())
        if len(lo) >= max_panels:
            break
        # bisect every panel holding more than its fair share of the budget
        share = budget / max(len(lo), 1)
        split = errs > 0.5 * max(share, errs.max() * 1e-3)
        keep = ~split
        mids = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[keep], lo[split], mids])
        new_hi = np.concatenate([hi[keep], mids, hi[split]])
        new_vals = np.empty_like(new_lo)
        new_errs = np.empty_like(new_lo)
        nk = keep.sum()
        new_vals[:nk], new_errs[:nk] = vals[keep], errs[keep]
        new_vals[nk:], new_errs[nk:] = _panels(f, new_lo[nk:], new_hi[nk:])
        lo, hi, vals, errs = new_lo, new_hi, new_vals, new_errs
    raise QuadratureError(
        "adaptive quadrature did not reach the requested tolerance",
        achieved=float(errs.sum()),
        requested=float(rtol),
        value=float(vals.sum()),
        panels=int(len(lo)),
    )


def integrate_cumulative(f, points, rtol=1e-10):
    """Cumulative integrals of f from points[0] to each later point.

    points must be nondecreasing.  Each segment is integrated adaptively,
    so the result is additive by construction.  Returns an array of the
    same length as points with result[0] = 0.
    """
    points = np.asarray(points, dtype=float)
    if np.any(np.diff(points) < 0):
        raise ValueError("points must be nondecreasing")
    segs = np.zeros(len(points))
    for i in range(1, len(points)):
        segs[i], _ = integrate(f, points[i - 1], points[i], rtol=rtol)
    return np.cumsum(segs)


def gauss_panel(f, a, b, n=8):
    """Fixed-order Gauss-Legendre panel rule used by the FEM assembly."""
    x, w = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * (f(mid + half * x) @ w)
