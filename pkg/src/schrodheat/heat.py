"""Heat kernels of the weighted semigroup and their oracles.

Two independent constructions of the same object:

* eigenexpansion  k_l(t,r,r') = sum_j exp(lam_j t) psi_j(r) psi_j(r'),
  summed over angular sectors with zonal weights for the full kernel;
* a Crank-Nicolson march of a discrete delta under the same sector
  generator, with Rannacher startup and step-halving control.

Everything radial is per unit solid angle; the zonal weights reintroduce
the angular normalization, so k_mu = sum_l Z_l(cos) k_l and the Lebesgue
kernel is k = k_mu / a(|y|).  The expansion refuses small times it cannot
resolve instead of degrading silently; small-t work belongs to the marcher.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from ._kernels import theta_march
from .errors import ConvergenceError, SpectralResolutionError
from .grids import RadialGrid
from .model import OperatorParams, coefficient_functions
from .spectral import (SectorFamily, SectorSpectrum, build_sector_family,
                       solve_eigenpairs)
from .zonal import harmonic_dim, sphere_area, zonal_table

EXPANSION_MIN_TIME = 0.05
TRUNC_TOL = 1e-12


@dataclass(frozen=True)
class SectorPack:
    """Eigen-data for sectors 0..ell_max on a common grid."""

    params: OperatorParams
    family: SectorFamily
    spectra: tuple

    @property
    def grid(self) -> RadialGrid:
        return self.family.grid

    @property
    def ell_max(self) -> int:
        return len(self.spectra) - 1

    @property
    def lambda0(self) -> float:
        return float(self.spectra[0].lambdas[0])

    def spectrum(self, ell: int) -> SectorSpectrum:
        return self.spectra[ell]


def compute_sectors(params: OperatorParams, grid: RadialGrid, ell_max: int,
                    n_modes: int, threads: int = 1) -> SectorPack:
    family = build_sector_family(params, grid)

    def solve(ell):
        return solve_eigenpairs(family.operator(ell), n_modes)

    ells = range(ell_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            spectra = tuple(pool.map(solve, ells))
    else:
        spectra = tuple(solve(l) for l in ells)
    return SectorPack(params, family, spectra)


# ---------------------------------------------------------------------------
# eigenexpansion side


def _sample_modes(spec: SectorSpectrum, r_samples):
    nodes = spec.nodes
    return np.array([np.interp(r_samples, nodes, p) for p in spec.psi])


def sector_kernel_matrix(spec: SectorSpectrum, t: float, r_samples,
                         lam_ref=None, tol: float = TRUNC_TOL):
    """k_l(t, r_i, r_j) = sum_j e^(lam_j t) psi_j(r_i) psi_j(r_j).

    Modes enter until e^((lam_m - lam_ref) t) < tol.  If the available
    spectrum cannot reach that weight the call refuses and names the
    smallest usable t rather than return a silently truncated kernel.
    Returns (matrix, modes_used, omitted_weight_bound).
    """
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    lams = spec.lambdas
    if lam_ref is None:
        lam_ref = float(lams[0])
    rel = np.exp((lams - lam_ref) * t)   # relative to the reference ground mode
    cut = np.nonzero(rel < tol)[0]
    if len(cut) == 0:
        min_time = math.log(1.0 / tol) / (lam_ref - float(lams[-1]))
        raise SpectralResolutionError(
            f"insufficient spectral resolution at t={t}: {len(lams)} modes "
            f"reach weight {rel[-1]:.3e} > {tol}; smallest usable "
            f"t is {min_time:.4g}",
            min_time=min_time,
        )
    used = int(cut[0])
    phi = _sample_modes(spec, r_samples)
    if used == 0:
        return (np.zeros((len(r_samples), len(r_samples))), 0,
                float(np.exp(lams[0] * t) * np.max(phi[0] ** 2)))
    mat = (phi[:used].T * np.exp(lams[:used] * t)) @ phi[:used]
    bound = (float(np.exp(lams[used] * t) * np.max(phi[used] ** 2))
             if used < len(lams) else 0.0)
    return mat, used, bound


@dataclass(frozen=True)
class KernelSlice:
    """k_mu sampled at fixed t, either one sector or fully reconstructed."""

    t: float
    r: np.ndarray
    values: np.ndarray            # (nr, nr) sector or (nr, nr, nc) full
    kind: str                     # "sector" | "reconstructed"
    modes_used: tuple
    ell_max: int
    truncation_bound: float
    cos_theta: np.ndarray = None

    def symmetry_residual(self) -> float:
        v = self.values
        if v.ndim == 2:
            dev = np.abs(v - v.T)
        else:
            dev = np.abs(v - np.transpose(v, (1, 0, 2)))
        return float(dev.max() / max(np.abs(v).max(), 1e-300))


def perangle_sector0(pack: SectorPack, t: float, r_samples) -> KernelSlice:
    """The l=0 radial kernel in per-solid-angle units."""
    mat, used, bound = sector_kernel_matrix(pack.spectrum(0), t, r_samples,
                                            lam_ref=pack.lambda0)
    return KernelSlice(float(t), np.asarray(r_samples, float), mat, "sector",
                       (used,), 0, bound)


def perangle_matrix(pack: SectorPack, t: float, r_samples, cos_theta):
    """omega * k_mu on the (r, r', cos) lattice, plus truncation metadata.

    Per-angle units: the l=0 term enters with weight 1, sector l with
    dim_l * C_l(c)/C_l(1).  Multiply by 1/omega_{N-1} for the true k_mu.
    """
    N = pack.params.N
    ell_max = pack.ell_max
    cos_theta = np.asarray(cos_theta, dtype=float)
    zr = zonal_table(N, ell_max, cos_theta) * sphere_area(N)
    mats = []
    used_all = []
    bound = 0.0
    for ell in range(ell_max + 1):
        mat, used, b = sector_kernel_matrix(pack.spectrum(ell), t, r_samples,
                                            lam_ref=pack.lambda0)
        mats.append(mat)
        used_all.append(used)
        bound += b * harmonic_dim(N, ell)
    full = np.einsum("lc,lij->ijc", zr, np.array(mats))
    # angular tail estimate from the last sector's share
    tail = np.abs(zr[-1])[None, None, :] * np.abs(mats[-1])[:, :, None]
    bound += float(tail.max())
    return full, tuple(used_all), bound


def assemble_kernel(pack: SectorPack, t: float, r_samples,
                    cos_theta) -> KernelSlice:
    """Full-space k_mu(t, x, y) for |x|, |y| in r_samples, x.y = cos_theta."""
    full, used, bound = perangle_matrix(pack, t, r_samples, cos_theta)
    kmu = full / sphere_area(pack.params.N)
    return KernelSlice(float(t), np.asarray(r_samples, float), kmu,
                       "reconstructed", used, pack.ell_max,
                       bound / sphere_area(pack.params.N),
                       np.asarray(cos_theta, float))


def perangle_diag(pack: SectorPack, t: float, r_samples):
    """omega * k_mu(t,x,x): sum_l dim_l k_l(t,r,r)."""
    N = pack.params.N
    out = np.zeros(len(r_samples))
    for ell in range(pack.ell_max + 1):
        spec = pack.spectrum(ell)
        mat, used, _ = sector_kernel_matrix(spec, t, r_samples,
                                            lam_ref=pack.lambda0)
        out += harmonic_dim(N, ell) * np.diag(mat)
    return out


def assemble_point(pack: SectorPack, t: float, x, y) -> float:
    """k_mu(t, x, y) for Cartesian points x, y (any matching dimension)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx, ry = np.linalg.norm(x), np.linalg.norm(y)
    if rx == 0 or ry == 0:
        cos = 1.0  # the zonal sum at the origin is direction-free
    else:
        cos = float(np.clip(x @ y / (rx * ry), -1.0, 1.0))
    ks = assemble_kernel(pack, t, np.array([rx, ry]), np.array([cos]))
    return float(ks.values[0, 1, 0])


def lebesgue_kernel(params: OperatorParams, kmu_values, r_y):
    """k(t,x,y) = k_mu(t,x,y) / a(|y|); breaks x<->y symmetry by a(x)/a(y)."""
    coeff = coefficient_functions(params)
    return np.asarray(kmu_values, float) / coeff.a(r_y)


def lebesgue_column(params: OperatorParams, ks: KernelSlice, y_index: int):
    """Lebesgue-kernel values k(t, ., y) extracted from a k_mu slice."""
    if ks.values.ndim == 2:
        col = ks.values[:, y_index]
    else:
        col = ks.values[:, y_index, :]
    return lebesgue_kernel(params, col, ks.r[y_index])


def mass_sup(pack: SectorPack, t: float) -> float:
    """sup_x int k(t,x,y) dy = sup_x sum_j e^(lam_j t) psi_j(x) <psi_j, 1>_mu.

    Radial reduction: only the l=0 sector meets the constant function.
    Sub-Markov contract: the value must not exceed 1 (plus quadrature slack).
    """
    spec = pack.spectrum(0)
    op = spec.op
    ones = np.ones(op.size)
    inner = np.array([op.mu_dot(p[:-1], ones) for p in spec.psi])
    col = (spec.psi.T * np.exp(spec.lambdas * t)) @ inner
    return float(col.max())


# ---------------------------------------------------------------------------
# time-stepping oracle


@dataclass(frozen=True)
class TimestepResult:
    ts: np.ndarray
    columns: np.ndarray        # (nt, n_nodes) k_mu(t, r_i, y) on the full grid
    y_radius: float
    y_index: int
    ell: int
    rel_dt: float
    halvings: int
    probe_residual: float
    notes: tuple = field(default=())

    def column_at(self, t) -> np.ndarray:
        i = int(np.argmin(np.abs(self.ts - t)))
        if not np.isclose(self.ts[i], t, rtol=1e-12, atol=0):
            raise KeyError(f"t={t} not among checkpoints {self.ts}")
        return self.columns[i]

    def mu_mass(self, op) -> np.ndarray:
        """int k_mu(t, y, x) dmu(x) per checkpoint; <= 1 and nonincreasing."""
        return np.array([float(np.sum(op.mass_matvec(c[:-1])))
                         for c in self.columns])


def _delta_column(op, y_index):
    """u0 = M^-1 e_y, the mass-weighted discrete delta."""
    ab = np.zeros((2, op.size))
    ab[0, 1:] = op.mass_off
    ab[1, :] = op.mass_diag
    rhs = np.zeros(op.size)
    rhs[y_index] = 1.0
    return solveh_banded(ab, rhs)


def _march_checkpoints(op, u0, ts, rel_dt, n_rannacher=4):
    """Theta-scheme march returning the state at each checkpoint time.

    Crank-Nicolson throughout, except n_rannacher backward-Euler half-steps
    at the start to damp the delta's unresolved modes.
    """
    md, me = op.mass_diag, op.mass_off
    kd, ke = op.stiff_diag, op.stiff_off
    u = u0.copy()
    out = np.empty((len(ts), len(u0)))
    t_prev = 0.0
    first = True
    for i, t in enumerate(ts):
        seg = t - t_prev
        nsub = max(4, int(math.ceil(seg / (rel_dt * t))))
        dt = seg / nsub
        if first:
            u = theta_march(md, me, kd, ke, u, 0.5 * dt, 2 * n_rannacher,
                            theta=1.0)
            done = n_rannacher * dt
            rest = seg - done
            nrest = max(1, int(round(rest / dt)))
            u = theta_march(md, me, kd, ke, u, rest / nrest, nrest, theta=0.5)
            first = False
        else:
            u = theta_march(md, me, kd, ke, u, dt, nsub, theta=0.5)
        out[i] = u
        t_prev = t
    return out


def timestep_oracle(params: OperatorParams, family: SectorFamily, ts,
                    y_radius: float, ell: int = 0, probe_radii=None,
                    rel_tol: float = 1e-6, rel_dt0: float = 1.0 / 16.0,
                    max_halvings: int = 10) -> TimestepResult:
    """Evolve a discrete delta at y under the sector generator.

    The step budget is halved until two successive marches agree to rel_tol
    at the probe radii and every checkpoint; the finer march is returned.
    """
    ts = np.asarray(sorted(ts), dtype=float)
    if ts[0] <= 0:
        raise ValueError("checkpoint times must be positive")
    op = family.operator(ell)
    nodes = family.grid.nodes
    y_index = int(np.argmin(np.abs(nodes[:-1] - y_radius)))
    if probe_radii is None:
        probe_radii = np.geomspace(max(nodes[1], 0.2), 0.6 * nodes[-1], 8)
    u0 = _delta_column(op, y_index)
    rel_dt = rel_dt0
    prev = _march_checkpoints(op, u0, ts, rel_dt)
    for halvings in range(1, max_halvings + 1):
        rel_dt *= 0.5
        cur = _march_checkpoints(op, u0, ts, rel_dt)
        scale = np.abs(cur).max(axis=1, keepdims=True)
        pidx = np.searchsorted(nodes[:-1], probe_radii).clip(0, op.size - 1)
        resid = float(np.max(np.abs(cur[:, pidx] - prev[:, pidx])
                             / np.maximum(scale, 1e-300)))
        if resid < rel_tol:
            cols = np.zeros((len(ts), len(nodes)))
            cols[:, :-1] = cur
            return TimestepResult(ts, cols, float(nodes[y_index]), y_index,
                                  ell, rel_dt, halvings, resid)
        prev = cur
    raise ConvergenceError(
        "time-step control did not reach its tolerance",
        rel_dt=rel_dt, residual=resid, halvings=max_halvings,
    )


# ---------------------------------------------------------------------------
# small-time diagonal by sector resummation of marched columns


@dataclass(frozen=True)
class SmallTimeDiag:
    ts: np.ndarray
    radii: np.ndarray
    kmu_diag: np.ndarray       # (nt, nr), true k_mu(t, x, x) units
    ell_used: tuple
    rel_dt: float
    notes: tuple = field(default=())


def _diag_history(family, ell, y_index, ts, rel_dt):
    """Diagonal value history with dt-Richardson over (rel_dt, rel_dt/2)."""
    op = family.operator(ell)
    u0 = _delta_column(op, y_index)
    coarse = _march_checkpoints(op, u0, ts, rel_dt)[:, y_index]
    fine = _march_checkpoints(op, u0, ts, 0.5 * rel_dt)[:, y_index]
    return (4.0 * fine - coarse) / 3.0


def small_time_diag(params: OperatorParams, family: SectorFamily,
                    family_fine: SectorFamily, radii, ts,
                    rel_dt: float = 1.0 / 32.0, ell_tol: float = 1e-7,
                    ell_cap: int = 128) -> SmallTimeDiag:
    """k_mu(t, x, x) for small t, resummed over sectors.

    Each sector's diagonal value comes from a marched delta column; sectors
    join until their relative contribution at the smallest t drops below
    ell_tol twice in a row.  Values are Richardson-extrapolated across the
    two nested grids (family = coarse, family_fine = one uniform halving)
    to clear the O(h^2) bias of the discrete delta.
    """
    ts = np.asarray(sorted(ts), dtype=float)
    nodes_c = family.grid.nodes
    idx_c = np.array([int(np.argmin(np.abs(nodes_c[:-1] - r))) for r in radii])
    radii_actual = nodes_c[idx_c]
    if len(np.unique(idx_c)) != len(idx_c):
        raise ValueError("requested radii collapse onto the same grid node")
    # fine grid must contain the coarse nodes (uniform halving)
    idx_f = idx_c * 2
    if not np.allclose(family_fine.grid.nodes[idx_f], radii_actual):
        raise ValueError("fine grid does not nest the coarse grid")
    N = params.N
    diag = np.zeros((len(ts), len(radii_actual)))
    ell_used = []
    for col, (ic, jf) in enumerate(zip(idx_c, idx_f)):
        total = np.zeros(len(ts))
        small = 0
        ell = 0
        while ell <= ell_cap:
            hc = _diag_history(family, ell, ic, ts, rel_dt)
            hf = _diag_history(family_fine, ell, jf, ts, rel_dt)
            term = harmonic_dim(N, ell) * (4.0 * hf - hc) / 3.0
            total += term
            rel = abs(term[0]) / max(abs(total[0]), 1e-300)
            small = small + 1 if rel < ell_tol else 0
            if small >= 2:
                break
            ell += 1
        ell_used.append(ell)
        diag[:, col] = total
    kmu = diag / sphere_area(N)
    return SmallTimeDiag(ts, radii_actual, kmu, tuple(ell_used), rel_dt)
