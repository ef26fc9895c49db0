#!/usr/bin/env python3
"""Time the numba kernels against their fallback paths.

The compiled path runs the Thomas/Numerov loops under @njit; the fallback
is LAPACK banded Cholesky per CN step and the same Numerov source uncompiled.
Run directly:  python benchmarks/bench_accel.py
Force the fallback everywhere with SCHRODHEAT_DISABLE_NUMBA=1.
"""

import time

import numpy as np

from schrodheat import _kernels
from schrodheat._accel import HAVE_NUMBA, USE_NUMBA
from schrodheat.grids import build_grid
from schrodheat.model import make_params
from schrodheat.spectral import build_sector_family


def timed(fn, repeat=5):
    """Best of `repeat` calls of a zero-argument closure."""
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_cn_march(n=4096, nsteps=400):
    p = make_params(3, 2, 4)
    fam = build_sector_family(p, build_grid(p, n=n))
    op = fam.base
    # smooth data: a raw delta would leave undamped oscillatory modes whose
    # roundoff is path-dependent (the production oracle damps them first)
    r = fam.grid.nodes[:-1]
    u0 = np.exp(-((r - 2.0) ** 2) * 4.0)
    dt = 1e-3
    ad = op.mass_diag + 0.5 * dt * op.stiff_diag
    au = op.mass_off + 0.5 * dt * op.stiff_off
    bd = op.mass_diag - 0.5 * dt * op.stiff_diag
    bu = op.mass_off - 0.5 * dt * op.stiff_off

    t_scipy, u_s = timed(
        lambda: _kernels._march_scipy(ad, au, bd, bu, u0.copy(), nsteps)
    )
    row = {"kernel": f"cn_march n={n} steps={nsteps}", "fallback_s": t_scipy}
    if HAVE_NUMBA:
        from numba import njit

        compiled = njit(cache=True)(_kernels._thomas_march)
        compiled(ad, au, bd, bu, u0.copy(), 1)  # compile
        t_nb, u_n = timed(
            lambda: compiled(ad, au, bd, bu, u0.copy(), nsteps)
        )
        row["numba_s"] = t_nb
        row["agree"] = float(np.abs(u_n - u_s).max() / np.abs(u_s).max())
    return row


def bench_numerov(n=200000):
    rng = np.random.default_rng(1)
    t = -1e-4 * (1.0 + rng.random(n + 1))
    t_py, out_py = timed(
        lambda: _kernels._numerov_forward(t, 0.0, 1e-3, n - 2), repeat=3
    )
    row = {"kernel": f"numerov_forward n={n}", "fallback_s": t_py}
    if HAVE_NUMBA:
        from numba import njit

        compiled = njit(cache=True)(_kernels._numerov_forward)
        compiled(t, 0.0, 1e-3, 10)  # compile
        t_nb, out_nb = timed(
            lambda: compiled(t, 0.0, 1e-3, n - 2), repeat=3
        )
        row["numba_s"] = t_nb
        row["agree"] = abs(out_nb[2] - out_py[2]) / max(abs(out_py[2]), 1e-300)
    return row


def main():
    print(f"numba available: {HAVE_NUMBA}, accelerated path active: {USE_NUMBA}")
    rows = [bench_cn_march(), bench_numerov()]
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':{width}s}  {'fallback':>10s}  {'numba':>10s}  {'speedup':>8s}")
    for r in rows:
        fb = r["fallback_s"]
        if "numba_s" in r:
            nb = r["numba_s"]
            print(f"{r['kernel']:{width}s}  {fb:10.4f}s  {nb:10.4f}s  "
                  f"{fb / nb:7.1f}x   (agree {r['agree']:.1e})")
        else:
            print(f"{r['kernel']:{width}s}  {fb:10.4f}s  {'-':>10s}  {'-':>8s}")


if __name__ == "__main__":
    main()
