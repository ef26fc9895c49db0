"""Zonal harmonic kernels on S^(N-1) via the Gegenbauer recurrence.

Z_l(cos theta) is the reproducing kernel of the degree-l spherical
harmonics: summing Z_l(x.y) k_l(t,r,r') over sectors rebuilds the full
kernel from its radial parts.  Normalization is pinned by two contract
tests (radial reduction and the free-kernel match), not by a constant
quoted anywhere.
"""

import math

import numpy as np


def sphere_area(N: int) -> float:
    """Surface measure of S^(N-1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def harmonic_dim(N: int, ell: int) -> int:
    """Dimension of the space of degree-ell harmonics on S^(N-1)."""
    if ell == 0:
        return 1
    if ell == 1:
        return N
    return math.comb(ell + N - 1, ell) - math.comb(ell + N - 3, ell - 2)


def gegenbauer_table(ell_max: int, nu: float, x):
    """C_l^nu(x) for l = 0..ell_max via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((ell_max + 1,) + x.shape)
    out[0] = 1.0
    if ell_max >= 1:
        out[1] = 2.0 * nu * x
    for n in range(1, ell_max):
        out[n + 1] = (
            2.0 * (n + nu) * x * out[n] - (n + 2.0 * nu - 1.0) * out[n - 1]
        ) / (n + 1.0)
    return out


def zonal_table(N: int, ell_max: int, cos_theta):
    """Z_l(cos theta), rows l = 0..ell_max.

    Z_l(c) = dim_l * C_l^nu(c) / (C_l^nu(1) * omega_{N-1}), nu = (N-2)/2.
    """
    cos_theta = np.asarray(cos_theta, dtype=float)
    nu = 0.5 * (N - 2)
    table = gegenbauer_table(ell_max, nu, cos_theta)
    at_one = gegenbauer_table(ell_max, nu, np.array([1.0]))[:, 0]
    dims = np.array([harmonic_dim(N, l) for l in range(ell_max + 1)], dtype=float)
    return dims[:, None] * table / (at_one[:, None] * sphere_area(N))
