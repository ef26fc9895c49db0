"""Command line entry point.

Subcommands: spectrum | wkb | kernel | verify | report.
Exit codes: 0 success/pass, 1 bound violation, 2 invalid input,
3 numerical non-convergence.  Outputs are deterministic for a given
config and seed; the wall-clock timestamp lives only in run_info.json.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .errors import ConvergenceError, SpectralResolutionError
from .grids import auto_r_max, build_grid
from .heat import (EXPANSION_MIN_TIME, assemble_kernel, compute_sectors,
                   lebesgue_kernel, mass_sup, timestep_oracle)
from .model import coefficient_functions
from .spectral import (build_sector_family, build_sector_operator,
                       ground_state, solve_eigenpairs)
from .verify import (CHECK_IDS, VerifyContext, VerifySettings,
                     aggregate_verdict, run_checks)
from .wkb import (default_order, f_eval, profile_envelope_band,
                  residual_decay_report, residual_g, wkb_coefficients)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2
EXIT_NOCONV = 3


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_csv(path: Path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row) + "\n")


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out(cfg, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config_resolved.txt").write_text(cfg.resolved_text())
    _write_json(out_dir / "run_info.json", {"timestamp": time.time()})


def cmd_spectrum(cfg, out_dir: Path) -> int:
    params = cfg.params()
    tol = cfg.get_float("spectral.tol", 1e-7)
    modes = cfg.get_int("spectral.modes", 4)
    ell_max = cfg.get_int("spectral.ell_max", 1)
    max_depth = cfg.get_int("spectral.max_depth", 6)
    n0 = cfg.get_int("grid.n", 512)
    r_max = (None if cfg.get_str("grid.r_max", "auto") == "auto"
             else cfg.require_float("grid.r_max"))
    gs = ground_state(params, tol=tol, r_max=r_max, n0=n0,
                      max_depth=max_depth, n_modes=modes)
    _prepare_out(cfg, out_dir)
    rows = [(0, j, gs.lambdas[j]) for j in range(len(gs.lambdas))]
    grid = gs.grid
    psis = solve_eigenpairs(build_sector_operator(params, grid, 0), modes).psi
    for ell in range(1, ell_max + 1):
        spec = solve_eigenpairs(build_sector_operator(params, grid, ell), modes)
        rows += [(ell, j, spec.lambdas[j]) for j in range(len(spec.lambdas))]
    _write_csv(out_dir / "spectrum.csv", ("ell", "j", "lambda_j"), rows)
    efun_rows = [(r, *[psis[j][i] for j in range(modes)])
                 for i, r in enumerate(grid.nodes)]
    _write_csv(out_dir / "eigenfunctions.csv",
               ("r", *[f"psi_{j}" for j in range(modes)]), efun_rows)
    _write_json(out_dir / "ladder.json", {
        "ladder": [{"n": n, "lambda0_raw": raw, "lambda0_extrapolated": ex}
                   for n, raw, ex in gs.ladder],
        "lambda0": gs.lambda0,
        "tolerance": tol,
        "config": cfg.raw,
    })
    return EXIT_OK


def cmd_wkb(cfg, out_dir: Path, lam=None, k=None) -> int:
    params = cfg.params()
    lam = cfg.get_float("wkb.lambda", 0.0) if lam is None else lam
    k = cfg.get_int("wkb.k", default_order(params)) if k is None else k
    r_lo = cfg.get_float("wkb.r_lo", 10.0)
    r_hi = cfg.get_float("wkb.r_hi", 100.0)
    samples = cfg.get_int("wkb.samples", 40)
    exp = wkb_coefficients(params, lam, k)
    warnings = []
    if not exp.order_ok:
        warnings.append(
            f"order k={k} violates k*xi+2-alpha>0; slope target not reachable"
        )
        print(f"warning: {warnings[-1]}", file=sys.stderr)
    _prepare_out(cfg, out_dir)
    _write_csv(out_dir / "wkb_coefficients.csv", ("i", "c_i"),
               [(i, c) for i, c in enumerate(exp.coeffs, start=1)])
    rs = np.geomspace(max(r_lo, exp.base_radius), r_hi, samples)
    g = residual_g(params, exp, rs)
    f = f_eval(params, exp, rs)
    _write_csv(out_dir / "wkb_residual.csv",
               ("r", "g", "r2_g_minus_lambda", "f"),
               [(r, gv, r**2 * gv - lam, fv) for r, gv, fv in zip(rs, g, f)])
    rep = residual_decay_report(params, exp, r_lo, r_hi, samples)
    _write_json(out_dir / "wkb_slope.json", {
        "slope": rep.slope,
        "expected_slope": rep.expected_slope,
        "r_squared": rep.r_squared,
        "vacuous": rep.vacuous,
        "coefficients": list(exp.coeffs),
        "lambda": lam,
        "k": k,
        "envelope_band": profile_envelope_band(params, exp, max(r_lo, 1.0), r_hi),
        "warnings": warnings,
        "notes": list(rep.notes),
        "config": cfg.raw,
    })
    return EXIT_OK


def cmd_kernel(cfg, out_dir: Path, threads: int = 1) -> int:
    params = cfg.params()
    ts = cfg.get_floats("kernel.t", [0.1, 0.5])
    r_lat = cfg.get_floats("kernel.r", [0.5, 1.0, 1.5, 2.0])
    cos_lat = cfg.get_floats("kernel.cos", [-1.0, -0.5, 0.0, 0.5, 1.0])
    backend = cfg.get_str("kernel.backend", "eigen")
    n = cfg.get_int("grid.n", 2048)
    r_max_s = cfg.get_str("grid.r_max", "auto")
    r_max = auto_r_max(params) if r_max_s == "auto" else float(r_max_s)
    ell_max = cfg.get_int("spectral.ell_max", 16)
    modes = cfg.get_int("spectral.modes", 60)
    grid = build_grid(params, r_max=r_max, n=n,
                      grading=cfg.get_str("grid.grading", "uniform"),
                      ratio=cfg.get_float("grid.ratio", 1.0))
    coeff = coefficient_functions(params)
    _prepare_out(cfg, out_dir)
    if backend == "eigen":
        low = [t for t in ts if t < EXPANSION_MIN_TIME]
        if low:
            raise SpectralResolutionError(
                f"insufficient spectral resolution: eigenexpansion refused "
                f"for t={low}; smallest served t is {EXPANSION_MIN_TIME} "
                f"(use kernel.backend=timestep)",
                min_time=EXPANSION_MIN_TIME,
            )
        pack = compute_sectors(params, grid, ell_max, modes, threads=threads)
        rows = []
        meta = {"backend": "eigen", "ell_max": ell_max, "slices": []}
        for t in ts:
            ks = assemble_kernel(pack, t, np.asarray(r_lat), np.asarray(cos_lat))
            k_leb = lebesgue_kernel(params, ks.values,
                                    np.asarray(r_lat)[None, :, None])
            for i, rx in enumerate(r_lat):
                for j, ry in enumerate(r_lat):
                    for c, cv in enumerate(cos_lat):
                        rows.append((t, rx, ry, cv, ks.values[i, j, c],
                                     k_leb[i, j, c]))
            meta["slices"].append({
                "t": t,
                "modes_used": list(ks.modes_used),
                "truncation_bound": ks.truncation_bound,
                "symmetry_residual": ks.symmetry_residual(),
                "mass_sup": mass_sup(pack, t),
            })
        _write_csv(out_dir / "kernel.csv",
                   ("t", "r_x", "r_y", "cos_theta", "k_mu", "k"), rows)
        meta["config"] = cfg.raw
        _write_json(out_dir / "kernel_meta.json", meta)
    elif backend == "timestep":
        family = build_sector_family(params, grid)
        rows = []
        meta = {"backend": "timestep", "columns": []}
        for y in r_lat:
            res = timestep_oracle(params, family, ts, y)
            for it, t in enumerate(res.ts):
                for i, r in enumerate(grid.nodes):
                    if i % max(1, n // 256):
                        continue
                    kmu = res.columns[it, i]
                    rows.append((t, r, res.y_radius, kmu,
                                 kmu / coeff.a(res.y_radius)))
            meta["columns"].append({
                "y": res.y_radius, "halvings": res.halvings,
                "rel_dt": res.rel_dt, "probe_residual": res.probe_residual,
            })
        _write_csv(out_dir / "kernel_sector0_timestep.csv",
                   ("t", "r", "r_y", "k_mu_sector0", "k_sector0"), rows)
        meta["config"] = cfg.raw
        _write_json(out_dir / "kernel_meta.json", meta)
    else:
        raise ConfigError("kernel.backend", f"unknown backend {backend!r}")
    return EXIT_OK


def cmd_verify(cfg, out_dir: Path, corrupt=False) -> int:
    params = cfg.params()
    which = cfg.get_str("verify.checks", "all")
    which = list(CHECK_IDS) if which == "all" else [w.strip() for w in which.split(",")]
    settings = VerifySettings(seed=cfg.get_int("verify.seed", 20240601))
    if cfg.get_bool("verify.fast", False):
        settings = settings.fast()
    ctx = VerifyContext(params, settings, corrupt_exponent=corrupt)
    reports = run_checks(ctx, which)
    code, n_fail, n_inc = aggregate_verdict(reports)
    _prepare_out(cfg, out_dir)
    _write_json(out_dir / "verify_report.json", {
        "reports": [r.to_json_dict() for r in reports],
        "n_fail": n_fail,
        "n_inconclusive": n_inc,
        "aggregate": "fail" if n_fail else "pass",
        "corrupt_exponent": corrupt,
        "seed": settings.seed,
        "config": cfg.raw,
    })
    for r in reports:
        print(f"{r.id:24s} {r.verdict}")
    if n_inc:
        print(f"warning: {n_inc} inconclusive-with-drift report(s)")
    return EXIT_VIOLATION if n_fail else EXIT_OK


def cmd_report(cfg, out_dir: Path) -> int:
    path = out_dir / "verify_report.json"
    if not path.exists():
        print(f"no verify report at {path}", file=sys.stderr)
        return EXIT_INVALID
    data = json.loads(path.read_text())
    print(f"{'check':26s}{'verdict':26s}constants")
    for rep in data["reports"]:
        consts = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in sorted(rep["constants"].items()))
        print(f"{rep['id']:26s}{rep['verdict']:26s}{consts}")
        for note in rep["notes"]:
            print(f"{'':26s}note: {note}")
    print(f"aggregate: {data['aggregate']} "
          f"({data['n_fail']} fail, {data['n_inconclusive']} inconclusive)")
    return EXIT_VIOLATION if data["n_fail"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="schrodheat",
        description="Spectra, heat kernels and bound certificates for "
                    "(1+|x|^a)Lap - |x|^b on R^N",
    )
    ap.add_argument("command",
                    choices=["spectrum", "wkb", "kernel", "verify", "report"])
    ap.add_argument("--config", type=Path, default=None,
                    help="key=value config file")
    ap.add_argument("--out", type=Path, default=Path("out"),
                    help="output directory")
    ap.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE", help="override a config value")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--sanity", action="store_true",
                    help="force params.sanity=true")
    ap.add_argument("--debug-corrupt-exponent", action="store_true",
                    help="negative control: inject an exponent error into "
                         "the small-time checker")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"verify.seed={args.seed}")
    if args.sanity:
        overrides.append("params.sanity=true")
    try:
        cfg = load_config(args.config, overrides)
        out = args.out
        if out == Path("out") and cfg.has("output.dir"):
            out = Path(cfg.get_str("output.dir"))
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out)
        if args.command == "wkb":
            return cmd_wkb(cfg, out)
        if args.command == "kernel":
            return cmd_kernel(cfg, out, threads=args.threads)
        if args.command == "verify":
            return cmd_verify(cfg, out, corrupt=args.debug_corrupt_exponent)
        return cmd_report(cfg, out)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SpectralResolutionError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except ConvergenceError as exc:
        print(f"non-convergence: {exc} {exc.details}", file=sys.stderr)
        return EXIT_NOCONV
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"invalid output location: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
