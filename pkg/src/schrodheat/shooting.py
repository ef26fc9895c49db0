"""Independent eigenvalue oracle: Numerov shooting on the reduced radial ODE.

Substituting w(r) = r^((N-1)/2) u(r) removes the first-derivative term:
    w'' = Q(r) w,   Q = s(s-1)/r^2 + (V(r) + lam)/a(r),
with s = (N-1)/2 + l the regular indicial exponent.  Two Numerov sweeps
(outward from a series start near 0, inward from the truncation radius with
a WKB-decay start) meet at a match point inside the classically allowed
region; an eigenvalue makes the three-term recurrence hold across the joint.
This path shares nothing with the Galerkin solver, so agreement between the
two certifies both.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._kernels import numerov_backward, numerov_forward
from .grids import auto_r_max
from .model import OperatorParams, coefficient_functions


@dataclass(frozen=True)
class ShootResult:
    lam: float
    mismatch: float
    bracket: tuple
    n_steps: int
    r_match: float


def _turning_radius(params, lam):
    """Outer root of V(r) + lam = 0 (lam < 0); 1.0 if the well is trivial."""
    coeff = coefficient_functions(params)
    if not params.potential_on or lam >= 0:
        return 1.0
    lo, hi = 1e-6, 1.0
    while coeff.V(hi) < -lam and hi < 1e6:
        lo, hi = hi, hi * 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if coeff.V(mid) < -lam:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class Shooter:
    """Match-residual evaluator at fixed mesh; lam varies per call."""

    def __init__(self, params: OperatorParams, ell: int, lam_scale: float,
                 r_max=None, n_steps: int = 24000):
        self.params = params
        self.ell = ell
        self.coeff = coefficient_functions(params)
        self.s = 0.5 * (params.N - 1) + ell
        if r_max is None:
            r_max = auto_r_max(params)
        h = r_max / n_steps
        # start where the centrifugal stiffness is Numerov-resolvable
        r_a = max(1e-3, 2.0 * h,
                  1.5 * h * math.sqrt(max(self.s * (self.s - 1.0), 1.0)))
        self.r = np.linspace(r_a, r_max, n_steps + 1)
        self.h = self.r[1] - self.r[0]
        r_match = min(max(0.75 * _turning_radius(params, lam_scale), 4 * r_a),
                      0.8 * r_max)
        self.i_match = int(np.searchsorted(self.r, r_match))
        self.r_match = float(self.r[self.i_match])
        self._sing = self.s * (self.s - 1.0) / self.r**2
        self._a = self.coeff.a(self.r)
        self._V = self.coeff.V(self.r)
        self.n_steps = n_steps

    def residual(self, lam: float) -> float:
        """Normalized defect of the three-term recurrence at the match index."""
        q = self._sing + (self._V + lam) / self._a
        t = (self.h**2 / 12.0) * q
        # regular series start w = r^s (1 + c r^2), c = P(0)/(2+4s)
        c = (lam / float(self.coeff.a(0.0))) / (2.0 + 4.0 * self.s)
        r0, r1 = self.r[0], self.r[1]
        w0 = r0**self.s * (1.0 + c * r0**2)
        w1 = r1**self.s * (1.0 + c * r1**2)
        m = self.i_match
        _, wl_prev, wl_m, _ = numerov_forward(t, w0, w1, m)
        # decaying start at r_max; the inward-growing branch dominates anyway
        qe = max(q[-1], 0.0)
        wn = 1e-280
        wn1 = wn * math.exp(math.sqrt(qe) * self.h)
        wr_m, wr_next, _, _ = numerov_backward(t, wn, wn1, m)
        if wr_m == 0.0 or wl_m == 0.0:
            return math.inf
        scale = wl_m / wr_m
        lhs = (1.0 - t[m + 1]) * scale * wr_next + (1.0 - t[m - 1]) * wl_prev
        mid = (2.0 + 10.0 * t[m]) * wl_m
        norm = abs(lhs) + abs(mid)
        return (lhs - mid) / norm if norm > 0 else 0.0


def shoot_eigenvalue(params: OperatorParams, ell: int, lam_guess: float,
                     width: float = 0.25, r_max=None,
                     n_steps: int = 24000) -> ShootResult:
    """Refine an eigenvalue near lam_guess by bracketing the match residual.

    The bracket widens geometrically around the guess until the residual
    changes sign, then Brent's method polishes the root.
    """
    sh = Shooter(params, ell, lam_guess, r_max=r_max, n_steps=n_steps)
    f = sh.residual
    lo, hi = lam_guess - width, lam_guess + width
    flo, fhi = f(lo), f(hi)
    grow = 0
    while flo * fhi > 0 and grow < 12:
        lo -= width * 2.0**grow
        hi += width * 2.0**grow
        flo, fhi = f(lo), f(hi)
        grow += 1
    if flo * fhi > 0:
        raise ValueError(
            f"no sign change of the match residual around lam={lam_guess} "
            f"within [{lo}, {hi}]"
        )
    lam = brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16)
    return ShootResult(float(lam), float(f(lam)), (lo, hi),
                       n_steps, sh.r_match)


def shoot_scan(params: OperatorParams, ell: int, lam_lo: float, lam_hi: float,
               n_scan: int = 60, r_max=None, n_steps: int = 24000):
    """All eigenvalues in [lam_lo, lam_hi] caught by a sign-change scan."""
    sh = Shooter(params, ell, 0.5 * (lam_lo + lam_hi), r_max=r_max,
                 n_steps=n_steps)
    lams = np.linspace(lam_lo, lam_hi, n_scan)
    vals = [sh.residual(l) for l in lams]
    roots = []
    for a, b, fa, fb in zip(lams[:-1], lams[1:], vals[:-1], vals[1:]):
        if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0:
            roots.append(brentq(sh.residual, a, b, xtol=1e-12, rtol=8.9e-16))
    return sorted(roots, reverse=True)
