"""Checkers for the quantitative bounds: fit the constants, report verdicts.

Every bound proved for this operator is existential in its constants, so a
checker passes by exhibiting finite stable constants on a sampled lattice
and fails on unbounded drift or pointwise violation of a fitted envelope.
Reports are deterministic given (params, settings, seed).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fitting import fit_linear, fit_loglog
from .grids import auto_r_max, build_grid
from .heat import (SectorPack, compute_sectors, perangle_diag,
                   perangle_matrix, small_time_diag)
from .model import OperatorParams, coefficient_functions, envelope
from .spectral import GroundState, build_sector_family, ground_state

CHECK_IDS = (
    "groundstate-envelope",
    "eigenfunction-decay",
    "on-diagonal-lower",
    "main-upper",
    "small-time",
    "log-psi",
    "lyapunov",
    "sobolev-sample",
)


@dataclass(frozen=True)
class BoundReport:
    id: str
    constants: dict
    verdict: str                  # pass | fail | inconclusive-with-drift
    worst_point: dict
    lattice: dict
    notes: tuple = field(default=())

    def to_json_dict(self):
        return {
            "id": self.id,
            "constants": {k: _jsonable(v) for k, v in self.constants.items()},
            "verdict": self.verdict,
            "worst_point": {k: _jsonable(v) for k, v in self.worst_point.items()},
            "lattice": {k: _jsonable(v) for k, v in self.lattice.items()},
            "notes": list(self.notes),
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


@dataclass(frozen=True)
class VerifySettings:
    """Resolution knobs; defaults are the desk-scale lattice."""

    n_grid: int = 2048
    n_modes: int = 40
    ell_max: int = 16
    n_radial: int = 24
    n_cos: int = 8
    n_times: int = 12
    t_range: tuple = (0.05, 2.0)
    smalltime_range: tuple = (0.01, 1.0)
    smalltime_radii: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    smalltime_grid: int = 1536
    smalltime_rel_dt: float = 1.0 / 32.0
    eps_range: tuple = (1e-3, 1.0)
    n_eps: int = 12
    sobolev_samples: int = 128
    seed: int = 20240601

    def fast(self) -> "VerifySettings":
        return replace(self, n_grid=1024, n_modes=24, ell_max=8,
                       smalltime_grid=768, sobolev_samples=48)


class VerifyContext:
    """Caches the expensive shared artifacts across checkers."""

    def __init__(self, params: OperatorParams, settings: VerifySettings = None,
                 corrupt_exponent: bool = False):
        self.params = params
        self.s = settings or VerifySettings()
        self.corrupt_exponent = corrupt_exponent
        self._cache = {}

    @property
    def r_max(self) -> float:
        if not self.params.potential_on:
            return 12.0  # no envelope decay to solve; plain diffusion domain
        return auto_r_max(self.params)

    def ground(self, scale: int = 1) -> GroundState:
        key = ("gs", scale)
        if key not in self._cache:
            self._cache[key] = ground_state(
                self.params, tol=1e-7, n0=512, max_depth=6,
                r_max=scale * self.r_max,
            )
        return self._cache[key]

    def pack(self) -> SectorPack:
        if "pack" not in self._cache:
            grid = build_grid(self.params, r_max=self.r_max, n=self.s.n_grid)
            self._cache["pack"] = compute_sectors(
                self.params, grid, self.s.ell_max, self.s.n_modes
            )
        return self._cache["pack"]

    def radial_lattice(self, n=None):
        return np.geomspace(1.0, 0.8 * self.r_max, n or self.s.n_radial)

    def cos_lattice(self, n=None):
        return np.cos(np.linspace(0.0, np.pi, n or self.s.n_cos))

    def smalltime(self):
        if "smalltime" not in self._cache:
            p = self.params
            radii = list(self.s.smalltime_radii)
            if not p.potential_on:
                # unit diffusion: sectors needed grow like r/sqrt(t), so the
                # flat-constant probe stays at sub-unit radii
                radii = [r for r in radii if r <= 0.75] or [0.35, 0.5, 0.7]
            rm = max(self.r_max, 2.5 * max(radii))
            gc = build_grid(p, r_max=rm, n=self.s.smalltime_grid)
            gf = build_grid(p, r_max=rm, n=2 * self.s.smalltime_grid)
            ts = np.geomspace(*self.s.smalltime_range, self.s.n_times)
            radii = [r for r in radii if r < 0.5 * rm]
            self._cache["smalltime"] = small_time_diag(
                p, build_sector_family(p, gc), build_sector_family(p, gf),
                radii, ts, rel_dt=self.s.smalltime_rel_dt,
            )
        return self._cache["smalltime"]

    def rho_on(self, rs, scale: int = 1):
        return self.ground(scale).psi_at(rs) / envelope(self.params, rs)


def _report(id_, constants, verdict, worst=None, lattice=None, notes=()):
    return BoundReport(id_, constants, verdict, worst or {}, lattice or {},
                       tuple(notes))


# ---------------------------------------------------------------------------


def check_groundstate_envelope(ctx: VerifyContext) -> BoundReport:
    """Two-sided envelope of the ground state: rho = psi/Phi band and drift.

    The band is sampled on the fixed window [1, 0.8 r_max]; the drift probe
    re-solves on the doubled domain and measures the band change on the same
    window (Dirichlet-truncation pollution shows up there first).
    """
    p = ctx.params
    if p.sanity_mode:
        return _report("groundstate-envelope", {}, "pass",
                       notes=("skipped: sanity-mode parameters lie outside "
                              "the bound's hypotheses",))
    rs = ctx.radial_lattice()
    rho = ctx.rho_on(rs)
    rho2 = ctx.rho_on(rs, scale=2)
    c1, c2 = float(rho.min()), float(rho.max())
    band = c2 / c1 if c1 > 0 else math.inf
    band2 = float(rho2.max() / rho2.min()) if rho2.min() > 0 else math.inf
    drift = abs(band2 / band - 1.0) if math.isfinite(band) else math.inf
    ok = c1 > 0 and math.isfinite(band) and drift < 0.20
    notes = []
    if p.beta >= 3.0 * p.alpha - 2.0:
        notes.append(
            "beta >= 3*alpha-2: the band grows with the window (log-divergent "
            "phase correction); band reported on the fixed window"
        )
    return _report(
        "groundstate-envelope",
        {"C1": c1, "C2": c2, "band": band, "band_doubled_rmax": band2,
         "drift": drift},
        "pass" if ok else "inconclusive-with-drift",
        worst={"r_at_min": float(rs[np.argmin(rho)]),
               "r_at_max": float(rs[np.argmax(rho)])},
        lattice={"r": [float(rs[0]), float(rs[-1])], "points": len(rs)},
        notes=notes,
    )


def check_eigenfunction_decay(ctx: VerifyContext, n_modes: int = 6) -> BoundReport:
    """C_j = sup |psi_j| / Phi finite for each mode, with no outward growth.

    psi_j are renormalized to unit Lebesgue norm (per unit solid angle).
    Growth toward r_max is probed the way the envelope check does it:
    re-solve on the doubled domain and require the C_j measured on the fixed
    window to stay put (higher modes only reach their asymptotic regime far
    beyond any desk-scale window, so a within-window slope is not a fair
    test of the constants' finiteness).
    """
    p = ctx.params
    if p.sanity_mode:
        return _report("eigenfunction-decay", {}, "pass",
                       notes=("skipped: sanity-mode parameters",))
    pack = ctx.pack()
    spec = pack.spectrum(0)
    n_modes = min(n_modes, len(spec.lambdas))
    rs = ctx.radial_lattice(48)
    Phi = envelope(p, rs)
    grid2 = build_grid(p, r_max=2.0 * ctx.r_max, n=2 * ctx.s.n_grid)
    from .spectral import build_sector_operator, solve_eigenpairs
    spec2 = solve_eigenpairs(build_sector_operator(p, grid2, 0), n_modes)

    def consts_of(sp):
        out = []
        nodes = sp.nodes
        for j in range(n_modes):
            psi = sp.psi[j]
            leb = math.sqrt(np.trapezoid(psi**2 * nodes ** (p.N - 1), nodes))
            ratio = np.abs(np.interp(rs, nodes, psi / leb)) / Phi
            out.append(float(ratio.max()))
        return np.array(out)

    C = consts_of(spec)
    C2 = consts_of(spec2)
    drift = float(np.max(np.abs(C2 / C - 1.0)))
    ok = np.all(np.isfinite(C)) and drift < 0.20
    consts = {f"C_{j}": float(C[j]) for j in range(n_modes)}
    j_worst = int(np.argmax(np.abs(C2 / C - 1.0)))
    return _report(
        "eigenfunction-decay", {**consts, "drift_doubled_rmax": drift},
        "pass" if ok else "fail",
        worst={"mode": j_worst, "drift": drift},
        lattice={"r": [float(rs[0]), float(rs[-1])], "points": len(rs),
                 "modes": n_modes},
        notes=("no order relation in j is asserted",),
    )


def check_on_diagonal_lower(ctx: VerifyContext,
                            t_set=(0.25, 0.5, 1.0, 2.0)) -> BoundReport:
    """On-diagonal lower constant M: k(t,x,x) >= M e^(lam0 t) Phi(x)^2/a(x).

    In per-angle units M(t,r) = k_hat(t,r,r) e^(-lam0 t) / Phi(r)^2, which
    the expansion forces to dominate rho(r)^2; the excess over rho^2 is
    nonnegative and shrinks in t.
    """
    p = ctx.params
    if p.sanity_mode:
        return _report("on-diagonal-lower", {}, "pass",
                       notes=("skipped: sanity-mode parameters",))
    pack = ctx.pack()
    lam0 = pack.lambda0
    rs = ctx.radial_lattice()
    Phi = envelope(p, rs)
    # the expansion dominates its own ground term exactly, so the excess
    # asserts must compare against the pack's psi, not the ladder's
    spec0 = pack.spectrum(0)
    rho2 = (np.interp(rs, spec0.nodes, spec0.psi[0]) / Phi) ** 2
    Ms = []
    excess_prev = None
    monotone = True
    for t in t_set:
        M = perangle_diag(pack, t, rs) * math.exp(-lam0 * t) / Phi**2
        Ms.append(M)
        excess = M - rho2
        if excess.min() < -1e-6 * rho2.max():
            monotone = False
        if excess_prev is not None and np.any(excess - excess_prev > 1e-6 * rho2.max()):
            monotone = False
        excess_prev = excess
    Ms = np.array(Ms)
    M_inf = float(Ms.min())
    stable = abs(Ms[-1].min() / Ms[-2].min() - 1.0) < 0.10
    ok = M_inf > 0 and stable and monotone
    it, ir = np.unravel_index(np.argmin(Ms), Ms.shape)
    return _report(
        "on-diagonal-lower",
        {"M": M_inf, "rho_min_sq": float(rho2.min()),
         "stable_in_t": bool(stable)},
        "pass" if ok else "fail",
        worst={"t": float(t_set[it]), "r": float(rs[ir]), "margin": M_inf},
        lattice={"t": list(t_set), "r": [float(rs[0]), float(rs[-1])],
                 "points": len(rs)},
    )


def check_main_upper(ctx: VerifyContext) -> BoundReport:
    """Intrinsic ultracontractivity constants: C(t) <= c1 e^(c2 t^-b).

    c2 comes from OLS on log C(t) against t^-b; c1 is raised to the
    enveloping intercept on the standard lattice; the envelope is then
    re-verified on a finer independent lattice (5% slack).  The 2b covariate
    must fit worse, guarding the exponent.
    """
    p = ctx.params
    if p.sanity_mode:
        return _report("main-upper", {}, "pass",
                       notes=("skipped: sanity-mode parameters",))
    b = p.derived.b
    pack = ctx.pack()
    lam0 = pack.lambda0

    def sup_curve(rs, cos, ts):
        Phi = envelope(p, rs)
        out = np.empty(len(ts))
        for i, t in enumerate(ts):
            full, _, _ = perangle_matrix(pack, t, rs, cos)
            out[i] = (full * math.exp(-lam0 * t)
                      / (Phi[:, None, None] * Phi[None, :, None])).max()
        return out

    ts = np.geomspace(*ctx.s.t_range, ctx.s.n_times)
    C = sup_curve(ctx.radial_lattice(), ctx.cos_lattice(), ts)
    z = ts**-b
    fit = fit_linear(z, np.log(C))
    c2 = fit.slope
    log_c1 = float(np.max(np.log(C) - c2 * z))
    fit_2b = fit_linear(ts ** (-2.0 * b), np.log(C))
    # secondary diagnostic: the same fit on the pre-saturation flank only
    # (for slowly-decaying b the window is mostly saturated and the full
    # fit understates the transient exponent)
    transient = C > 3.0 * C[-1]
    fit_tr = (fit_linear(z[transient], np.log(C[transient]))
              if transient.sum() >= 4 else fit)

    ts_dense = np.geomspace(*ctx.s.t_range, ctx.s.n_times + 6)
    C_dense = sup_curve(ctx.radial_lattice(ctx.s.n_radial + 10),
                        ctx.cos_lattice(ctx.s.n_cos + 4), ts_dense)
    excess = float(np.max(C_dense / np.exp(log_c1 + c2 * ts_dense**-b) - 1.0))

    t_big = 20.0 / abs(lam0)
    C_big = sup_curve(ctx.radial_lattice(), ctx.cos_lattice(),
                      np.array([t_big]))[0]
    sup_rho2 = float(np.max(ctx.rho_on(ctx.radial_lattice()) ** 2))
    saturation = C_big / sup_rho2

    ok = (c2 >= 0 and fit.r_squared >= 0.98 and excess <= 0.05
          and abs(saturation - 1.0) <= 0.10)
    i_worst = int(np.argmax(C_dense / np.exp(log_c1 + c2 * ts_dense**-b)))
    return _report(
        "main-upper",
        {"c1": math.exp(log_c1), "c2": c2, "b": b,
         "r_squared": fit.r_squared, "r_squared_2b": fit_2b.r_squared,
         "c2_transient": fit_tr.slope, "r_squared_transient": fit_tr.r_squared,
         "envelope_excess": excess, "saturation_ratio": saturation},
        "pass" if ok else "fail",
        worst={"t": float(ts_dense[i_worst]), "excess": excess},
        lattice={"t": [float(ts[0]), float(ts[-1])], "t_points": len(ts),
                 "r_points": ctx.s.n_radial, "cos_points": ctx.s.n_cos},
        notes=("2b covariate degrades the fit"
               if fit_2b.r_squared < fit.r_squared else
               "warning: 2b covariate did not degrade the fit",),
    )


def check_log_psi(ctx: VerifyContext) -> BoundReport:
    """-log psi <= eps V + c(eps), with c(eps) ~ eps^-b.

    c(eps) = sup_r (-log psi - eps V) over [0, 0.8 r_max]; the fit of c
    against eps^-b must have nonnegative slope and R^2 >= 0.95.
    """
    p = ctx.params
    if p.sanity_mode:
        return _report("log-psi", {}, "pass",
                       notes=("skipped: sanity-mode parameters",))
    b = p.derived.b
    gs = ctx.ground()
    nodes = gs.grid.nodes
    keep = nodes <= 0.8 * ctx.r_max
    r = nodes[keep]
    psi = gs.psi[keep]
    coeff = coefficient_functions(p)
    neg_log = -np.log(psi)
    V = coeff.V(r)
    eps_set = np.geomspace(*ctx.s.eps_range, ctx.s.n_eps)
    c_eps = np.empty(len(eps_set))
    interior = np.empty(len(eps_set), dtype=bool)
    for i, e in enumerate(eps_set):
        vals = neg_log - e * V
        k = int(np.argmax(vals))
        c_eps[i] = vals[k]
        # a maximizer clipped by the window edge only lower-bounds c(eps);
        # psi is unobservable beyond (the true values sit below roundoff)
        interior[i] = k < len(vals) - 1
    if interior.sum() < 4:
        return _report("log-psi", {"interior_points": int(interior.sum())},
                       "inconclusive-with-drift",
                       notes=("window too small: supremum clipped at the "
                              "edge for almost every eps",))
    fit = fit_linear(eps_set[interior]**-b, c_eps[interior])
    monotone = bool(np.all(np.diff(c_eps) <= 1e-12 * np.abs(c_eps).max()))
    ok = fit.slope >= 0 and fit.r_squared >= 0.95 and monotone
    notes = []
    if not np.all(interior):
        notes.append(
            f"{int((~interior).sum())} small-eps points clipped by the "
            "window edge were excluded from the fit"
        )
    if not monotone:
        notes.append("c(eps) not monotone")
    resid = c_eps[interior] - fit.predict(eps_set[interior]**-b)
    i_worst = int(np.argmax(np.abs(resid)))
    return _report(
        "log-psi",
        {"slope": fit.slope, "intercept": fit.intercept,
         "r_squared": fit.r_squared, "b": b,
         "c_at_eps_1": float(c_eps[-1]),
         "neg_log_psi_at_0": float(neg_log[0])},
        "pass" if ok else "fail",
        worst={"eps": float(eps_set[interior][i_worst]),
               "fit_residual": float(resid[i_worst])},
        lattice={"eps": [float(eps_set[0]), float(eps_set[-1])],
                 "eps_points": len(eps_set), "fit_points": int(interior.sum()),
                 "r_points": int(keep.sum())},
        notes=notes,
    )


def check_small_time(ctx: VerifyContext) -> BoundReport:
    """Sharp small-time bound: C(t) = sup k_mu t^(N/2) [a(x)a(y)]^((N-2)/4).

    By Cauchy-Schwarz for the symmetric positive kernel the sup over (x,y)
    lives on the diagonal, which is resummed over marched sectors.  The
    trend "no growth as t drops" is fitted on the small-t decade, where the
    scaling question lives (near t=1 absorption pulls C down regardless);
    the verdict is two-sided in the slope, which is the sharpness of the
    t^(-N/2) rate.  The corruption flag injects the N/2+0.5 exponent error.
    """
    p = ctx.params
    data = ctx.smalltime()
    exponent = p.N / 2.0 + (0.5 if ctx.corrupt_exponent else 0.0)
    coeff = coefficient_functions(p)
    w = coeff.a(data.radii) ** ((p.N - 2) / 2.0)
    Cmat = data.kmu_diag * data.ts[:, None] ** exponent * w[None, :]
    C = Cmat.max(axis=1)
    t_lo = data.ts[0]
    small = data.ts <= 10.0 * t_lo + 1e-12
    fit = fit_loglog(data.ts[small], C[small])
    full_fit = fit_loglog(data.ts, C)
    ok = abs(fit.slope) <= 0.05
    notes = []
    if ctx.corrupt_exponent:
        notes.append("corruption flag active: exponent N/2+0.5 injected")
    consts = {"slope_small_t": fit.slope, "slope_full": full_fit.slope,
              "C_max": float(C.max()), "C_at_t_min": float(C[0]),
              "exponent": exponent}
    if p.sanity_mode and not p.potential_on and p.alpha == 0:
        flat = (4.0 * math.pi) ** (-p.N / 2.0)
        consts["free_deviation"] = float(np.abs(C / flat - 1.0).max())
    if 2.0 < p.alpha <= 4.0 or p.alpha > 4.0:
        # cruder two-line remark bound, recorded for information
        if p.alpha > 4.0:
            wr = ((1.0 + data.radii) ** (2 - p.N)
                  * (1.0 + data.radii) ** (2 - p.N - p.alpha))
        else:
            wr = coeff.a(data.radii) ** ((2 - p.N) / 2.0) / coeff.a(data.radii)
        Crem = (data.kmu_diag * data.ts[:, None] ** (p.N / 2.0) / wr[None, :])
        consts["remark_bound_sup"] = float(Crem.max())
    it, ir = np.unravel_index(np.argmax(Cmat), Cmat.shape)
    return _report(
        "small-time", consts, "pass" if ok else "fail",
        worst={"t": float(data.ts[it]), "r": float(data.radii[ir])},
        lattice={"t": [float(data.ts[0]), float(data.ts[-1])],
                 "t_points": len(data.ts),
                 "diag_radii": [float(r) for r in data.radii],
                 "ell_used": list(data.ell_used)},
        notes=notes,
    )


def check_lyapunov(ctx: VerifyContext, r_hi: float = 1e3,
                   n_points: int = 10000) -> BoundReport:
    """Lyapunov certificate: A phi <= kappa phi for phi = a(r)^((2-N)/4).

    A phi / phi = g(g+N-2) r^(2a-2)/a + g(a-2+N) r^(a-2)/a - r^b with
    g = alpha(2-N)/4; the expression tends to -inf (beta > alpha-2), so the
    sup is attained and finite.
    """
    p = ctx.params
    if p.sanity_mode:
        return _report("lyapunov", {}, "pass",
                       notes=("skipped: sanity-mode parameters",))
    N, alpha, beta = p.N, p.alpha, p.beta
    gamma = alpha * (2.0 - N) / 4.0

    def expr(r):
        r = np.asarray(r, dtype=float)
        a = 1.0 + r**alpha
        return (gamma * (gamma + N - 2.0) * r ** (2.0 * alpha - 2.0) / a
                + gamma * (alpha - 2.0 + N) * r ** (alpha - 2.0) / a
                - r**beta)

    r = np.geomspace(1e-6, r_hi, n_points)
    if alpha > 2:
        # at the origin every term vanishes; include the point exactly
        r = np.concatenate([[0.0], r])
    vals = expr(r)
    i = int(np.argmax(vals))
    # golden-section polish on the bracketing neighbours
    lo = r[max(i - 1, 0)]
    hi = r[min(i + 1, len(r) - 1)]
    from scipy.optimize import minimize_scalar
    if hi > lo:
        res = minimize_scalar(lambda x: -expr(x), bounds=(lo, hi),
                              method="bounded",
                              options={"xatol": 1e-12 * max(hi, 1.0)})
        kappa = max(float(vals[i]), float(-res.fun))
        r_at = float(res.x) if -res.fun >= vals[i] else float(r[i])
    else:
        kappa, r_at = float(vals[i]), float(r[i])
    # the sup must be attained (expression sinks to -inf on the right);
    # attainment at the origin (kappa = 0) is a valid certificate
    attained = i < len(r) - 1 and vals[-1] < kappa
    ok = math.isfinite(kappa) and attained
    notes = []
    if alpha <= 4.0:
        notes.append("alpha <= 4: outside the certificate's regime, "
                     "reported informationally")
    violations = int(np.sum(vals > kappa + 1e-12 * max(abs(kappa), 1.0)))
    return _report(
        "lyapunov",
        {"gamma": gamma, "kappa": kappa, "r_at_max": r_at,
         "grid_violations": violations},
        "pass" if ok and violations == 0 else "fail",
        worst={"r": r_at, "value": kappa},
        lattice={"r": [0.0, r_hi], "points": len(r)},
        notes=notes,
    )


def check_sobolev_sample(ctx: VerifyContext) -> BoundReport:
    """Falsification probe of int g u^2 dmu <= C |g|_{N/2,mu} a(u,u).

    Random compactly supported hat combinations u and nonnegative weights g;
    the max ratio over samples must stabilize (a finite uniform constant
    exists, so unbounded growth across samples would flag a discretization
    inconsistency).  Scale-invariant in both u and g by construction.
    """
    p = ctx.params
    s = ctx.s
    rng = np.random.default_rng(s.seed)
    pack = ctx.pack()
    op = pack.family.base
    nodes = pack.grid.nodes
    coeff = coefficient_functions(p)
    gx, gw = np.polynomial.legendre.leggauss(8)
    lo, hi = nodes[:-1], nodes[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    xg = mid[:, None] + half[:, None] * gx[None, :]
    wq = half[:, None] * gw[None, :]
    rho = coeff.rho_mu(xg)
    n_unk = op.size

    def radial_int(fvals):
        return float(np.sum(wq * fvals))

    ratios = []
    for _ in range(s.sobolev_samples):
        width = int(rng.integers(3, 9))
        start = int(rng.integers(1, n_unk - width - 13))
        u = np.zeros(n_unk)
        u[start:start + width] = rng.standard_normal(width)
        # g overlaps u's support (disjoint supports give the trivial ratio 0)
        gstart = max(1, start - int(rng.integers(0, 4)))
        gw_width = width + int(rng.integers(0, 8))
        gvals = np.zeros(n_unk)
        gvals[gstart:gstart + gw_width] = np.abs(rng.standard_normal(gw_width))
        u_full = np.concatenate([u, [0.0]])
        g_full = np.concatenate([gvals, [0.0]])
        ug = np.interp(xg, nodes, u_full)
        gg = np.interp(xg, nodes, g_full)
        num = radial_int(gg * ug**2 * rho)
        g_norm = radial_int(gg ** (p.N / 2.0) * rho) ** (2.0 / p.N)
        a_form = float(u @ op.stiff_matvec(u))
        if g_norm == 0 or a_form == 0:
            continue
        ratios.append(num / (g_norm * a_form))
    ratios = np.array(ratios)
    half_max = ratios[: len(ratios) // 2].max()
    full_max = ratios.max()
    # statistical creep of an empirical max is expected; divergence by
    # orders of magnitude between sample batches is what would flag a
    # discretization inconsistency
    ok = bool(np.all(np.isfinite(ratios))) and full_max <= 4.0 * half_max
    return _report(
        "sobolev-sample",
        {"max_ratio": float(full_max), "first_half_max": float(half_max),
         "samples": int(len(ratios)), "seed": s.seed},
        "pass" if ok else "fail",
        worst={"sample_index": int(np.argmax(ratios))},
        lattice={"n_grid": pack.grid.n_elements},
    )


_CHECKERS = {
    "groundstate-envelope": check_groundstate_envelope,
    "eigenfunction-decay": check_eigenfunction_decay,
    "on-diagonal-lower": check_on_diagonal_lower,
    "main-upper": check_main_upper,
    "small-time": check_small_time,
    "log-psi": check_log_psi,
    "lyapunov": check_lyapunov,
    "sobolev-sample": check_sobolev_sample,
}


def run_checks(ctx: VerifyContext, which=None):
    """Run the selected checkers; reports merged in canonical id order."""
    which = list(which) if which else list(CHECK_IDS)
    unknown = [w for w in which if w not in _CHECKERS]
    if unknown:
        raise ValueError(f"unknown checker ids: {unknown}")
    reports = [_CHECKERS[cid](ctx) for cid in CHECK_IDS if cid in which]
    return reports


def aggregate_verdict(reports):
    """(exit_code, n_fail, n_inconclusive): 0 pass, 1 any fail."""
    n_fail = sum(r.verdict == "fail" for r in reports)
    n_inc = sum(r.verdict == "inconclusive-with-drift" for r in reports)
    return (1 if n_fail else 0), n_fail, n_inc
