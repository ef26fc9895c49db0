"""Galerkin discretization per angular sector and eigenpair extraction.

Piecewise-linear conforming elements on the radial grid discretize the
symmetric form  a(u,u) = int (u')^2 r^(N-1) dr
                       + int [V + a(r) l(l+N-2)/r^2] u^2 rho_mu dr
against the weighted mass  int u^2 rho_mu dr  (all per unit solid angle).
The centrifugal weight a(r) rho_mu / r^2 collapses to r^(N-3) exactly, so
every integrand is smooth and the first element never samples r = 0.
Conformity makes the discrete top eigenvalue increase monotonically toward
the true one under nested refinement, which the ground-state ladder records.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ConvergenceError
from .grids import RadialGrid, auto_r_max, build_grid
from .model import OperatorParams, coefficient_functions

_GX, _GW = np.polynomial.legendre.leggauss(8)

DENSE_CUTOFF = 500


@dataclass(frozen=True)
class SectorOperator:
    """Tridiagonal stiffness/mass pair over the unknown nodes.

    Unknowns are all nodes except the last (homogeneous Dirichlet at r_max);
    the node at r = 0 carries a natural condition for every sector.
    """

    ell: int
    grid: RadialGrid
    stiff_diag: np.ndarray
    stiff_off: np.ndarray
    mass_diag: np.ndarray
    mass_off: np.ndarray

    @property
    def size(self) -> int:
        return len(self.stiff_diag)

    def mass_matvec(self, u):
        out = self.mass_diag * u
        out[:-1] += self.mass_off * u[1:]
        out[1:] += self.mass_off * u[:-1]
        return out

    def stiff_matvec(self, u):
        out = self.stiff_diag * u
        out[:-1] += self.stiff_off * u[1:]
        out[1:] += self.stiff_off * u[:-1]
        return out

    def mu_dot(self, u, v):
        return float(u @ self.mass_matvec(v))


def _weighted_element_integrals(xg, wq, weight, phi_dn, phi_up):
    w = wq * weight
    m11 = np.sum(w * phi_dn * phi_dn, axis=1)
    m12 = np.sum(w * phi_dn * phi_up, axis=1)
    m22 = np.sum(w * phi_up * phi_up, axis=1)
    return m11, m12, m22


def build_sector_operator(params: OperatorParams, grid: RadialGrid,
                          ell: int) -> SectorOperator:
    if ell < 0:
        raise ValueError(f"sector index must be >= 0, got {ell}")
    coeff = coefficient_functions(params)
    nodes = grid.nodes
    lo, hi = nodes[:-1], nodes[1:]
    h = hi - lo
    mid = 0.5 * (lo + hi)
    half = 0.5 * h
    xg = mid[:, None] + half[:, None] * _GX[None, :]
    wq = half[:, None] * _GW[None, :]
    phi_dn = (hi[:, None] - xg) / h[:, None]
    phi_up = (xg - lo[:, None]) / h[:, None]

    N = params.N
    # gradient term, exact: (1/h^2) int_el r^(N-1) dr
    grad = (hi**N - lo**N) / (N * h**2)

    w_total = coeff.V(xg) * coeff.rho_mu(xg)
    if ell > 0:
        w_total = w_total + ell * (ell + N - 2) * xg ** (N - 3)
    s11, s12, s22 = _weighted_element_integrals(xg, wq, w_total, phi_dn, phi_up)
    m11, m12, m22 = _weighted_element_integrals(
        xg, wq, coeff.rho_mu(xg), phi_dn, phi_up
    )

    n_nodes = len(nodes)
    sd = np.zeros(n_nodes)
    so = np.zeros(n_nodes - 1)
    md = np.zeros(n_nodes)
    mo = np.zeros(n_nodes - 1)
    sd[:-1] += grad + s11
    sd[1:] += grad + s22
    so[:] = -grad + s12
    md[:-1] += m11
    md[1:] += m22
    mo[:] = m12
    # Dirichlet truncation: drop the last node
    return SectorOperator(int(ell), grid, sd[:-1], so[:-1], md[:-1], mo[:-1])


@dataclass(frozen=True)
class SectorFamily:
    """Shared assembly for all sectors on one grid.

    K_l = K_0 + l(l+N-2) C with C the centrifugal matrix (weight r^(N-3)),
    so higher sectors cost two axpys instead of a quadrature pass.
    """

    params: OperatorParams
    grid: RadialGrid
    base: SectorOperator       # ell = 0
    cent_diag: np.ndarray
    cent_off: np.ndarray

    def operator(self, ell: int) -> SectorOperator:
        if ell == 0:
            return self.base
        fac = ell * (ell + self.params.N - 2)
        return SectorOperator(
            int(ell), self.grid,
            self.base.stiff_diag + fac * self.cent_diag,
            self.base.stiff_off + fac * self.cent_off,
            self.base.mass_diag, self.base.mass_off,
        )


def build_sector_family(params: OperatorParams, grid: RadialGrid) -> SectorFamily:
    base = build_sector_operator(params, grid, 0)
    nodes = grid.nodes
    lo, hi = nodes[:-1], nodes[1:]
    h = hi - lo
    mid = 0.5 * (lo + hi)
    half = 0.5 * h
    xg = mid[:, None] + half[:, None] * _GX[None, :]
    wq = half[:, None] * _GW[None, :]
    phi_dn = (hi[:, None] - xg) / h[:, None]
    phi_up = (xg - lo[:, None]) / h[:, None]
    c11, c12, c22 = _weighted_element_integrals(
        xg, wq, xg ** (params.N - 3), phi_dn, phi_up
    )
    n_nodes = len(nodes)
    cd = np.zeros(n_nodes)
    co = np.zeros(n_nodes - 1)
    cd[:-1] += c11
    cd[1:] += c22
    co[:] = c12
    return SectorFamily(params, grid, base, cd[:-1], co[:-1])


@dataclass(frozen=True)
class EigenPair:
    lam: float
    psi: np.ndarray   # samples on the full node set (0 at r_max)
    ell: int
    normalization: str = "unit-l2-mu"


@dataclass(frozen=True)
class SectorSpectrum:
    """m highest eigenvalues of one sector, mu-orthonormal, signs fixed."""

    op: SectorOperator
    lambdas: np.ndarray   # descending, all < 0 for valid parameters
    psi: np.ndarray       # (m, n_nodes) on the full grid incl. boundary zero

    @property
    def ell(self) -> int:
        return self.op.ell

    @property
    def nodes(self) -> np.ndarray:
        return self.op.grid.nodes

    @property
    def pairs(self):
        return [EigenPair(float(l), p, self.op.ell)
                for l, p in zip(self.lambdas, self.psi)]

    def gram_residual(self) -> float:
        vecs = self.psi[:, :-1]
        G = vecs @ np.array([self.op.mass_matvec(v) for v in vecs]).T
        return float(np.max(np.abs(G - np.eye(len(vecs)))))

    def eigen_residuals(self) -> np.ndarray:
        out = []
        for lam, p in zip(self.lambdas, self.psi):
            u = p[:-1]
            r = self.op.stiff_matvec(u) + lam * self.op.mass_matvec(u)
            out.append(np.linalg.norm(r) / np.linalg.norm(self.op.mass_matvec(u)))
        return np.array(out)


def _fix_signs(vecs):
    for v in vecs:
        big = np.abs(v) > 1e-8 * np.abs(v).max()
        if v[np.argmax(big)] < 0:
            v *= -1.0
    return vecs


def solve_eigenpairs(op: SectorOperator, m: int) -> SectorSpectrum:
    """m algebraically largest eigenvalues of (-S) u = lam M u.

    Equivalently the m smallest of S u = nu M u with nu = -lam >= 0.
    Banded shift-invert Lanczos with a fixed start vector; dense solve
    below DENSE_CUTOFF unknowns.
    """
    n = op.size
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= {n}, got {m}")
    if n <= DENSE_CUTOFF or m > n - 2:
        S = np.diag(op.stiff_diag)
        S += np.diag(op.stiff_off, 1) + np.diag(op.stiff_off, -1)
        M = np.diag(op.mass_diag)
        M += np.diag(op.mass_off, 1) + np.diag(op.mass_off, -1)
        nu, vecs = scipy.linalg.eigh(S, M, subset_by_index=[0, m - 1])
        vecs = vecs.T
    else:
        S = scipy.sparse.diags(
            [op.stiff_off, op.stiff_diag, op.stiff_off], [-1, 0, 1], format="csc"
        )
        M = scipy.sparse.diags(
            [op.mass_off, op.mass_diag, op.mass_off], [-1, 0, 1], format="csc"
        )
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            nu, vecs = eigsh(S, k=m, M=M, sigma=0.0, which="LM", v0=v0)
        except ArpackNoConvergence as exc:
            raise ConvergenceError(
                "sector eigensolve did not converge",
                ell=op.ell, n=n, modes=m,
                converged=len(getattr(exc, "eigenvalues", [])),
            ) from exc
        order = np.argsort(nu)
        nu, vecs = nu[order], vecs[:, order].T

    # mu-orthonormalize (eigenvalues are simple, so this is just scaling
    # plus a Cholesky touch-up against roundoff)
    vecs = np.array([v / np.sqrt(op.mu_dot(v, v)) for v in vecs])
    G = vecs @ np.array([op.mass_matvec(v) for v in vecs]).T
    if np.max(np.abs(G - np.eye(m))) > 1e-12:
        L = np.linalg.cholesky(G)
        vecs = np.linalg.solve(L, vecs)
    vecs = _fix_signs(vecs)
    psi = np.zeros((m, n + 1))
    psi[:, :-1] = vecs
    return SectorSpectrum(op, -nu, psi)


@dataclass(frozen=True)
class GroundState:
    params: OperatorParams
    lambdas: np.ndarray        # Richardson-extrapolated, descending
    lambdas_raw: np.ndarray    # finest-level raw values
    psi: np.ndarray            # ground eigenfunction on the finest grid
    grid: RadialGrid
    ladder: tuple              # (n_elements, raw lambda0, extrapolated lambda0)
    tol: float

    @property
    def lambda0(self) -> float:
        return float(self.lambdas[0])

    def psi_at(self, r):
        return np.interp(r, self.grid.nodes, self.psi)


def ground_state(params: OperatorParams, tol: float = 1e-8, r_max=None,
                 n0: int = 512, max_depth: int = 8, n_modes: int = 1) -> GroundState:
    """Radial (l=0) top eigenpairs over a nested refinement ladder.

    Elements double per level on a fixed domain (the auto envelope radius by
    default), so the spaces nest and the raw lambda0 increases monotonically.
    Successive h^2 Richardson extrapolations must agree to tol to converge.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if r_max is None:
        r_max = auto_r_max(params)
    ladder = []
    prev_raw = None
    prev_ex = None
    result = None
    for level in range(max_depth):
        n = n0 * 2**level
        grid = build_grid(params, r_max=r_max, n=n)
        spec = solve_eigenpairs(build_sector_operator(params, grid, 0), n_modes)
        raw = spec.lambdas.copy()
        ex = raw if prev_raw is None else raw + (raw - prev_raw) / 3.0
        ladder.append((n, float(raw[0]), float(ex[0])))
        if prev_ex is not None and np.all(np.abs(ex - prev_ex) < tol):
            result = GroundState(params, ex, raw, spec.psi[0], grid,
                                 tuple(ladder), tol)
            break
        prev_raw, prev_ex = raw, ex
    if result is None:
        raise ConvergenceError(
            f"ground state not converged to {tol} in {max_depth} levels",
            ladder=ladder,
        )
    # strict positivity, qualified at the eigensolver's noise floor: the
    # true tail decays below 1e-16 of the peak, where sign is meaningless
    interior = result.psi[1:-1]
    bad = interior <= 0
    floor = 1e-12 * interior.max()
    if np.any(bad & (np.abs(interior) > floor)):
        raise ConvergenceError(
            "ground eigenfunction not strictly positive on interior nodes",
            worst=float(interior.min()), ladder=ladder,
        )
    return result


@dataclass(frozen=True)
class RadialGapReport:
    lambda0_radial: float
    lambda0_ell1: float
    gap: float
    n_elements: int
    r_max: float

    @property
    def ground_is_radial(self) -> bool:
        return self.gap > 0


def verify_radial_ground(params: OperatorParams, r_max=None,
                         n: int = 4096) -> RadialGapReport:
    """Check that the global ground state lives in the l = 0 sector."""
    if r_max is None:
        r_max = auto_r_max(params)
    grid = build_grid(params, r_max=r_max, n=n)
    lam0 = solve_eigenpairs(build_sector_operator(params, grid, 0), 1).lambdas[0]
    lam1 = solve_eigenpairs(build_sector_operator(params, grid, 1), 1).lambdas[0]
    return RadialGapReport(float(lam0), float(lam1), float(lam0 - lam1),
                           grid.n_elements, grid.r_max)
