"""Acceptance criteria, one test per criterion, one printed line each.

Exact-solution oracles (harmonic oscillator, free Laplacian) pin the
absolute accuracy; the production parameter sets (3,2,4) and (4,4,4)
exercise every fitted bound at its stated tolerance.
"""

import math
import time

import numpy as np

from schrodheat import wkb
from schrodheat.grids import auto_r_max
from schrodheat.heat import (SectorPack, assemble_kernel, mass_sup,
                             timestep_oracle)
from schrodheat.model import envelope, make_params
from schrodheat.spectral import ground_state
from schrodheat.verify import (VerifyContext, check_lyapunov, check_main_upper,
                               check_small_time)


def _line(num, ok, text):
    print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, text


def test_criterion_1_oscillator_oracle(osc):
    t0 = time.perf_counter()
    gs = ground_state(osc, tol=1e-7, n0=512, max_depth=5, n_modes=2)
    elapsed = time.perf_counter() - t0
    err0 = abs(gs.lambdas[0] + 3.0)
    err1 = abs(gs.lambdas[1] + 7.0)
    nodes = gs.grid.nodes
    mask = nodes <= 4.0
    ratio = gs.psi[mask] / np.exp(-nodes[mask] ** 2 / 2.0)
    dev = np.max(np.abs(ratio / ratio[0] - 1.0))
    ok = (err0 < 1e-6 and err1 < 1e-5 and dev < 1e-4
          and len(gs.ladder) <= 5 and elapsed < 30.0)
    _line(1, ok, f"lam0 err {err0:.2e} (<1e-6), lam1 err {err1:.2e} (<1e-5), "
                 f"psi ratio dev {dev:.2e} (<1e-4), "
                 f"{len(gs.ladder)} levels in {elapsed:.1f}s (<30s)")


def test_criterion_2_free_kernel_oracle(free_pack):
    t = 0.1
    rs = np.array([0.5, 1.0, 1.5, 2.0])
    cs = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    d2 = (rs[:, None, None] ** 2 + rs[None, :, None] ** 2
          - 2 * rs[:, None, None] * rs[None, :, None] * cs[None, None, :])
    target = (4 * math.pi * t) ** -1.5 * np.exp(-d2 / (4 * t))
    mask = target >= 1e-6 * (4 * math.pi * t) ** -1.5
    # ell_max sweep until 1% agreement, capped at 32
    prev = None
    worst = math.inf
    used_ell = None
    for ell_max in (8, 16, 24, 32):
        sub = SectorPack(free_pack.params, free_pack.family,
                         free_pack.spectra[: ell_max + 1])
        vals = assemble_kernel(sub, t, rs, cs).values
        if prev is not None:
            sweep_dev = np.abs(vals - prev)[mask].max() / target[mask].max()
            if sweep_dev < 0.01:
                worst = np.abs(vals / target - 1.0)[mask].max()
                used_ell = ell_max
                break
        prev = vals
    ok = used_ell is not None and used_ell <= 32 and worst < 0.01
    _line(2, ok, f"free kernel rel err {worst:.2e} (<1e-2) on |x|,|y| in "
                 f"[0.5,2] at t=0.1, ell_max={used_ell} (<=32)")


def test_criterion_3_wkb_golden_values():
    p = make_params(3, 2, 4)
    e = wkb.wkb_coefficients(p, 0.0, 3)
    golden = e.coeffs == (-0.375, 0.75, -2.3203125)
    zeros = all(c == 0.0 for c in wkb.wkb_coefficients(p, p.derived.c0, 5).coeffs)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        N = int(rng.integers(3, 9))
        alpha = float(rng.uniform(2.0, 6.0))
        beta = alpha - 2.0 + float(rng.uniform(0.25, 6.0))
        lam = float(rng.uniform(-10.0, 10.0))
        k = int(rng.integers(1, 9))
        pp = make_params(N, alpha, beta)
        res = wkb.recurrence_residuals(pp, wkb.wkb_coefficients(pp, lam, k))
        if len(res):
            worst = max(worst, float(np.abs(res).max()))
    ok = golden and zeros and worst < 1e-12
    _line(3, ok, f"golden coefficients exact, lam=c0 gives zeros, "
                 f"sweep residual {worst:.2e} (<1e-12)")


def test_criterion_4_wkb_residual_decay():
    p = make_params(3, 2, 4)
    e = wkb.wkb_coefficients(p, 0.0, 3)
    rep = wkb.residual_decay_report(p, e, 10.0, 100.0, 40)
    pde_worst = max(wkb.pde_residual(p, e, r) for r in (2.0, 3.0, 5.0, 7.0))
    ok = rep.slope <= -1.9 and pde_worst < 1e-6
    _line(4, ok, f"decay slope {rep.slope:.3f} (<=-1.9, expected -2), "
                 f"PDE identity residual {pde_worst:.2e} (<1e-6)")


def test_criterion_5_groundstate_envelope():
    msgs, ok = [], True
    for (N, a, b) in ((3, 2, 4), (4, 4, 4)):
        p = make_params(N, a, b)
        rmax = auto_r_max(p)
        gs = ground_state(p, tol=1e-7, n0=512, max_depth=6)
        gs2 = ground_state(p, tol=1e-7, n0=512, max_depth=6, r_max=2 * rmax)
        rs = np.geomspace(1.0, 0.8 * rmax, 24)
        Phi = envelope(p, rs)
        band = (gs.psi_at(rs) / Phi)
        band2 = (gs2.psi_at(rs) / Phi)
        ratio = band.max() / band.min()
        drift = abs((band2.max() / band2.min()) / ratio - 1.0)
        ok &= ratio <= 10.0 and drift < 0.20 and band.min() > 0
        msgs.append(f"({N},{a},{b}): band {ratio:.2f} (<=10) "
                    f"drift {drift:.1e} (<0.2)")
    _line(5, ok, "; ".join(msgs))


def test_criterion_6_kernel_cross_validation(pack324):
    spec = pack324.spectrum(0)
    op = pack324.family.base
    nodes = spec.nodes
    res = timestep_oracle(pack324.params, pack324.family, [0.5], 1.0)
    probe = (nodes >= 0.5) & (nodes <= 4.0)
    w = np.exp(spec.lambdas * 0.5)
    col_eig = (np.array([np.interp(nodes[probe], nodes, ps)
                         for ps in spec.psi]).T * w) @ spec.psi[:, res.y_index]
    agree = float(np.max(np.abs(res.column_at(0.5)[probe] - col_eig))
                  / np.abs(col_eig).max())
    ck_worst = 0.0
    for (t, s) in ((0.25, 0.25), (0.25, 0.5)):
        Kt = (spec.psi[:, :-1].T * np.exp(spec.lambdas * t)) @ spec.psi[:, :-1]
        Ks = (spec.psi[:, :-1].T * np.exp(spec.lambdas * s)) @ spec.psi[:, :-1]
        Kts = (spec.psi[:, :-1].T
               * np.exp(spec.lambdas * (t + s))) @ spec.psi[:, :-1]
        prod = Kt @ np.array([op.mass_matvec(c) for c in Ks.T]).T
        ck_worst = max(ck_worst,
                       float(np.abs(prod - Kts).max() / np.abs(Kts).max()))
    rs = np.geomspace(0.5, 6.0, 16)
    sym = assemble_kernel(pack324, 0.5, rs,
                          np.array([-0.5, 0.5, 1.0])).symmetry_residual()
    m1, m2 = mass_sup(pack324, 1.0), mass_sup(pack324, 2.0)
    ok = (agree < 1e-3 and ck_worst < 1e-6 and sym < 1e-10
          and m1 <= 1 + 1e-6 and m2 <= m1)
    _line(6, ok, f"cross-val {agree:.1e} (<1e-3), CK {ck_worst:.1e} (<1e-6), "
                 f"symmetry {sym:.1e} (<1e-10), mass {m1:.6f}>= {m2:.6f} both <=1+1e-6")


def test_criterion_7_main_upper_bound(ctx324):
    rep = check_main_upper(ctx324)
    c = rep.constants
    ok = (rep.verdict == "pass" and c["c2"] >= 0 and c["r_squared"] >= 0.98
          and c["envelope_excess"] <= 0.05
          and abs(c["saturation_ratio"] - 1) <= 0.10)
    _line(7, ok, f"R2 {c['r_squared']:.4f} (>=0.98), c2 {c['c2']:.3f} (>=0), "
                 f"envelope excess {c['envelope_excess']:.2%} (<=5%), "
                 f"saturation {c['saturation_ratio']:.4f} (within 10%)")


def test_criterion_8_small_time_bound(ctx324, free_smalltime):
    rep = check_small_time(ctx324)
    slope = rep.constants["slope_small_t"]
    C = free_smalltime.kmu_diag * free_smalltime.ts[:, None] ** 1.5
    free_dev = float(np.abs(C / (4 * math.pi) ** -1.5 - 1.0).max())
    ok = rep.verdict == "pass" and slope >= -0.05 and free_dev < 1e-4
    _line(8, ok, f"(3,2,4) small-t slope {slope:.4f} (>=-0.05), free C(t) "
                 f"deviation from (4pi)^-3/2: {free_dev:.2e} (<1e-4)")


def test_criterion_9_lyapunov_certificate():
    rep = check_lyapunov(VerifyContext(make_params(5, 5, 4)), n_points=10000)
    kappa = rep.constants["kappa"]
    gamma_spot = 6 * (2 - 3) / 4.0
    ok = (rep.verdict == "pass" and math.isfinite(kappa)
          and rep.constants["grid_violations"] == 0 and gamma_spot == -1.5
          and check_lyapunov(VerifyContext(make_params(3, 6, 5))
                             ).constants["gamma"] == -1.5)
    _line(9, ok, f"(5,5,4): kappa {kappa:.4f} finite, A phi - kappa phi <= 0 "
                 f"on 1e4-point grid; gamma(3,6) = -1.5 exact")


def test_criterion_10_negative_control(tmp_path):
    from schrodheat.cli import main
    args = ["verify", "--set", "params.N=3", "--set", "params.alpha=2",
            "--set", "params.beta=4", "--set", "verify.fast=true",
            "--set", "verify.checks=small-time"]
    clean = main(args + ["--out", str(tmp_path / "clean")])
    corrupted = main(args + ["--out", str(tmp_path / "bad"),
                             "--debug-corrupt-exponent"])
    ok = clean == 0 and corrupted == 1
    _line(10, ok, f"clean exit {clean} (=0), corrupted-exponent exit "
                  f"{corrupted} (=1): the suite can actually fail")
