"""Operator parameters, coefficient functions and the ground-state envelope.

The operator under study is A u = (1+|x|^alpha) Lap u - |x|^beta u on R^N
with N > 2, alpha >= 2, beta > alpha - 2.  ``sanity_mode`` admits the
exactly solvable oracle cases (alpha=0 harmonic oscillator / free Laplacian);
in that mode an exponent of zero means the coefficient is absent, i.e.
alpha=0 gives unit diffusion and beta=0 gives zero potential, so the exact
spectra and kernels used as test oracles come out on the nose.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from (N, alpha, beta).

    xi          exponent step of the asymptotic correction series,
                xi = (beta-alpha)/2 + 1
    b           time exponent of the kernel bound,
                b = (beta-alpha+2)/(beta+alpha-2)  (nan when beta+alpha <= 2)
    c0          constant term of the radial reduction,
                c0 = ((xi-1)/2)^2 + (xi-1)/2 - (N-1)(N-3)/4
    power_exp   q in the envelope r^q, q = -(N-1)/2 - (beta-alpha)/4
    phase_exp   p in the envelope exp term, p = (beta-alpha+2)/2
    phase_coeff 2/(beta-alpha+2)
    """

    xi: float
    b: float
    c0: float
    power_exp: float
    phase_exp: float
    phase_coeff: float


@dataclass(frozen=True)
class OperatorParams:
    N: int
    alpha: float
    beta: float
    sanity_mode: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or self.N <= 2:
            raise ValueError(f"dimension N must be an integer > 2, got {self.N}")
        if self.sanity_mode:
            if self.alpha < 0 or self.beta < 0:
                raise ValueError(
                    "sanity_mode requires alpha >= 0 and beta >= 0, got "
                    f"alpha={self.alpha}, beta={self.beta}"
                )
        else:
            if self.alpha < 2:
                raise ValueError(
                    f"hypothesis alpha >= 2 violated: alpha={self.alpha}"
                )
            if self.beta <= self.alpha - 2:
                raise ValueError(
                    "hypothesis beta > alpha-2 violated: "
                    f"beta={self.beta} <= alpha-2={self.alpha - 2}"
                )

    @cached_property
    def derived(self) -> DerivedConstants:
        xi = 0.5 * (self.beta - self.alpha) + 1.0
        denom = self.beta + self.alpha - 2.0
        b = (self.beta - self.alpha + 2.0) / denom if denom > 0 else math.nan
        c0 = (
            ((xi - 1.0) / 2.0) ** 2
            + (xi - 1.0) / 2.0
            - (self.N - 1) * (self.N - 3) / 4.0
        )
        return DerivedConstants(
            xi=xi,
            b=b,
            c0=c0,
            power_exp=-(self.N - 1) / 2.0 - (self.beta - self.alpha) / 4.0,
            phase_exp=0.5 * (self.beta - self.alpha + 2.0),
            phase_coeff=2.0 / (self.beta - self.alpha + 2.0),
        )

    @property
    def diffusion_offset(self) -> float:
        """Constant part of a(r); zero in the alpha=0 oracle convention."""
        return 0.0 if (self.sanity_mode and self.alpha == 0) else 1.0

    @property
    def potential_on(self) -> bool:
        return not (self.sanity_mode and self.beta == 0)


def make_params(N, alpha, beta, sanity_mode=False) -> OperatorParams:
    """Validate (N, alpha, beta) and compute the derived constants eagerly."""
    if int(N) != N:
        raise ValueError(f"dimension N must be an integer > 2, got {N}")
    p = OperatorParams(int(N), float(alpha), float(beta), bool(sanity_mode))
    p.derived  # fail fast on anything degenerate
    return p


class Coefficients:
    """Radial coefficient functions of the operator, vectorized over r >= 0.

    a(r)      = 1 + r^alpha   (diffusion)
    V(r)      = r^beta        (absorption potential)
    h(r)      = V(r) / a(r)
    rho_mu(r) = r^(N-1) / a(r), radial density of the symmetrizing measure
                per unit solid angle (the angular constant is applied only
                in full-space reconstruction).
    """

    def __init__(self, params: OperatorParams):
        self.params = params
        self._a0 = params.diffusion_offset

    def a(self, r):
        r = np.asarray(r, dtype=float)
        return self._a0 + r**self.params.alpha

    def V(self, r):
        r = np.asarray(r, dtype=float)
        if not self.params.potential_on:
            return np.zeros_like(r)
        return r**self.params.beta

    def h(self, r):
        return self.V(r) / self.a(r)

    def rho_mu(self, r):
        r = np.asarray(r, dtype=float)
        return r ** (self.params.N - 1) / self.a(r)

    # Hand-derived log-derivatives of h; the residual function cancels
    # violently, so these must not come from numeric differentiation.
    def h_logderiv(self, r):
        """h'(r)/h(r) = beta/r - alpha r^(alpha-1)/(1+r^alpha)."""
        r = np.asarray(r, dtype=float)
        p = self.params
        return p.beta / r - p.alpha * r ** (p.alpha - 1.0) / self.a(r)

    def h_d2_over_h(self, r):
        """h''(r)/h(r) from the closed form

        (h'/h)' = -beta/r^2 - alpha r^(alpha-2) ((alpha-1) - r^alpha) / a(r)^2
        h''/h   = (h'/h)^2 + (h'/h)'.
        """
        r = np.asarray(r, dtype=float)
        p = self.params
        lder = self.h_logderiv(r)
        lder_prime = -p.beta / r**2 - p.alpha * r ** (p.alpha - 2.0) * (
            (p.alpha - 1.0) - r**p.alpha
        ) / self.a(r) ** 2
        return lder**2 + lder_prime


def coefficient_functions(params: OperatorParams) -> Coefficients:
    return Coefficients(params)


def envelope(params: OperatorParams, r):
    """Closed-form ground-state envelope r^q exp(-c r^p).

    Guaranteed two-sided only for r >= 1; evaluations below 1 are allowed
    (checkers that rely on the guarantee restrict their own ranges).
    """
    d = params.derived
    r = np.asarray(r, dtype=float)
    return r**d.power_exp * np.exp(-d.phase_coeff * r**d.phase_exp)


def log_envelope(params: OperatorParams, r):
    """log of the envelope; usable far past double-precision underflow."""
    d = params.derived
    r = np.asarray(r, dtype=float)
    return d.power_exp * np.log(r) - d.phase_coeff * r**d.phase_exp


def young_constant(params: OperatorParams, eps):
    """C(eps) = sup_r (r^xi - eps r^beta), finite since xi < beta.

    Maximizer r* = (xi/(eps beta))^(1/(beta-xi)) gives
    C(eps) = (1 - xi/beta) (xi/(eps beta))^(xi/(beta-xi)), i.e. exactly
    const * eps^(-b) with b = xi/(beta-xi).
    """
    d = params.derived
    eps = np.asarray(eps, dtype=float)
    if d.xi >= params.beta:
        raise ValueError("requires xi < beta, i.e. beta > alpha - 2 with beta > xi")
    return (1.0 - d.xi / params.beta) * (d.xi / (eps * params.beta)) ** (
        d.xi / (params.beta - d.xi)
    )
