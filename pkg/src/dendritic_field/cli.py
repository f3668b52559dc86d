"""Command line entry point: ``dendritic-field {simulate,sweep,profiles,validate,kf}``.

Exit codes: 0 success, 1 configuration error (or failed validation), 2 numerical blow-up.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io, plotting
from .experiments import SweepResult, nu_sweep, profile_experiment
from .grid import build_grid
from .model import estimate_KF
from .stepper import run

log = logging.getLogger("dendritic_field")

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2


def emit_sweep(result: SweepResult, outdir, plots=True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = [
        io.write_csv(outdir / "sweep.csv", ["nu", "e"], result.pairs),
        io.write_csv(outdir / "summary.csv", ["slope", "intercept", "r2"],
                     [(result.slope, result.intercept, result.r2)]),
    ]
    if plots:
        files.append(plotting.plot_sweep(result, outdir / "sweep.svg"))
    return files


def emit_slice(xi, values, path) -> Path:
    return io.write_csv(path, ["xi", "v"], zip(xi, values))


def emit_profiles(result, outdir, plots=True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files, curves = [], {}
    for nu in result.nus:
        for t in result.times:
            tag = f"nu{nu:g}_t{t:g}"
            f = result.fields[(nu, t)]
            files.append(io.write_snapshot(f, t, outdir / f"field_{tag}.dnf"))
            files.append(emit_slice(result.xi, result.slice(nu, t), outdir / f"slice_{tag}.csv"))
            curves[rf"$\nu$={nu:g}, t={t:g}"] = result.slice(nu, t)
    if plots:
        files.append(plotting.plot_slices(result.xi, curves, outdir / "profiles.svg"))
    return files


def _outdir(cfg, args):
    return Path(args.out) if args.out else Path(cfg.output_dir)


def cmd_simulate(cfg, args):
    grid = build_grid(cfg.effective_grid)
    traj = run(cfg.model, grid, cfg.timegrid, snapshot_every=cfg.snapshot_every, workers=cfg.threads)
    out = _outdir(cfg, args)
    out.mkdir(parents=True, exist_ok=True)
    for n, f in zip(traj.snapshot_steps, traj.snapshots):
        io.write_snapshot(f, cfg.timegrid.time(n), out / f"snap_{n:05d}.dnf")
    io.write_csv(out / "norms.csv", ["t", "l2sq"],
                 [(cfg.timegrid.time(n), e) for n, e in enumerate(traj.norms_sq)])
    emit_slice(grid.xi_nodes, traj.final.slice_at_x(0.0), out / "slice_final.csv")
    if cfg.plots and not args.no_plots:
        plotting.plot_field(traj.final, cfg.timegrid.T, out / "field_final.png")
    print(f"wrote {len(traj.snapshots)} snapshots to {out}")


def cmd_sweep(cfg, args):
    result = nu_sweep(cfg.sweep_config(), workers=cfg.threads)
    emit_sweep(result, _outdir(cfg, args), plots=cfg.plots and not args.no_plots)
    for nu, e in result.pairs:
        print(f"nu={nu:<8g} e={e:.10g}")
    print(f"slope={result.slope:.10g} intercept={result.intercept:.10g} r2={result.r2:.6f}")


def cmd_profiles(cfg, args):
    result = profile_experiment(cfg.model, cfg.effective_grid, cfg.timegrid,
                                nus=(0.0, cfg.profile_nu), workers=cfg.threads)
    files = emit_profiles(result, _outdir(cfg, args), plots=cfg.plots and not args.no_plots)
    print(f"wrote {len(files)} files to {_outdir(cfg, args)}")


def cmd_kf(cfg, args):
    est = estimate_KF(cfg.model, build_grid(cfg.effective_grid), detail=True)
    print(f"K_F = {est.value:.17g}")
    print(f"  ||W|| = {est.kernel_norm:.17g}, |Omega| = {est.area:.17g}, sup|S'| = {est.sup_dS:.17g}")


def cmd_validate(args):
    from .validation import run_all

    checks = run_all()
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dendritic-field", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("simulate", "single run, binary snapshots"),
        ("sweep", "nu-sweep of the squared distance to the nu=0 run"),
        ("profiles", "x=0 profiles at t=1 and t=3 for nu=0 and nu=profile_nu"),
        ("kf", "print the operator constant K_F"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="configuration file")
        sp.add_argument("-o", "--out", help="output directory (overrides [output] directory)")
        sp.add_argument("--full", action="store_true", help="use the full 4096x1024 resolution")
        sp.add_argument("--threads", type=int, help="thread-count hint")
        sp.add_argument("--no-plots", action="store_true")
    sub.add_parser("validate", help="run oracle and property checks")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "validate":
        return cmd_validate(args)
    try:
        cfg = io.parse_config(args.config)
        if args.full:
            cfg = replace(cfg, scale="full")
        if args.threads:
            cfg = replace(cfg, threads=args.threads)
    except io.ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for p in exc.problems:
            print(f"  {p}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {"simulate": cmd_simulate, "sweep": cmd_sweep,
               "profiles": cmd_profiles, "kf": cmd_kf}[args.command]
    try:
        handler(cfg, args)
    except FloatingPointError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
