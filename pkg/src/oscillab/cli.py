"""Command line front end: sweep, solve, spectrum, and audit subcommands.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import spectral
from .atlas import (
    EMIT_KINDS,
    RegimeMap,
    SweepConfig,
    conjecture_audit,
    curve_band_mask,
    load_sweep_config,
    run_sweep,
    so_region_report,
    sweep_mesh_cells,
    theoretical_curves,
    vn_slack,
)
from .diagnostics import DiagnosticsConfig, run_simulation
from .outputs import read_csv, write_outputs, write_report
from .problems import BC_KINDS, EQUATION_NAMES, build_mesh, default_ibvp, equation_by_name
from .schemes import SCHEME_KINDS


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--equation", choices=EQUATION_NAMES, default="heat")
    p.add_argument("--scheme", choices=SCHEME_KINDS, default="ftcs")
    p.add_argument("--bc", choices=BC_KINDS, default="dirichlet")
    p.add_argument("--ic", default="default",
                   help="initial profile: default|sine|cosine|front|step|zero")
    p.add_argument("--length", type=float, default=1.0, help="domain size L")
    p.add_argument("--final-time", type=float, default=30.0,
                   help="simulated horizon T")


def _add_diag_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cap-K", type=float, default=1e6,
                   help="divergence cap multiplier")
    p.add_argument("--osc-deadband", type=float, default=None,
                   help="absolute oscillation deadband (default 1e-12*|u0|)")
    p.add_argument("--max-steps", type=int, default=50_000)
    p.add_argument("--mode-seed", type=float, default=0.01,
                   help="relative amplitude of the highest-mode perturbation")


def build_parser() -> _Parser:
    parser = _Parser(prog="oscillab",
                     description="Stability and oscillation regime maps for "
                                 "finite-difference parabolic solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="classify a full (dx, dt) grid")
    _add_problem_flags(sweep)
    _add_diag_flags(sweep)
    sweep.add_argument("--dx-range", type=float, nargs=2, default=(0.01, 1.0),
                       metavar=("LOW", "HIGH"))
    sweep.add_argument("--dt-range", type=float, nargs=2, default=(0.01, 1.0),
                       metavar=("LOW", "HIGH"))
    sweep.add_argument("--resolution", type=int, default=100)
    sweep.add_argument("--out", type=Path, default=Path("out"))
    sweep.add_argument("--emit", nargs="+", choices=EMIT_KINDS,
                       default=list(EMIT_KINDS))
    sweep.add_argument("--log-axes", action="store_true",
                       help="draw figures on log-log axes")
    sweep.add_argument("--collapse-uo", action="store_true",
                       help="report UO cells as U in CSV/image outputs")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--config", type=Path, default=None,
                       help="JSON file mirroring the sweep configuration")

    solve = sub.add_parser("solve", help="run one (dx, dt) simulation")
    _add_problem_flags(solve)
    _add_diag_flags(solve)
    solve.add_argument("--dx", type=float, required=True)
    solve.add_argument("--dt", type=float, required=True)
    solve.add_argument("--out", type=Path, default=None,
                       help="directory for the solution figure")
    solve.add_argument("--emit", nargs="+", choices=("png",), default=[])

    spectrum = sub.add_parser("spectrum",
                              help="print eigenvalues and condition bounds")
    _add_problem_flags(spectrum)
    spectrum.add_argument("--dx", type=float, required=True)
    spectrum.add_argument("--dt", type=float, required=True)

    audit = sub.add_parser("audit", help="conjecture report from a sweep CSV")
    _add_problem_flags(audit)
    audit.add_argument("csv", type=Path)
    audit.add_argument("--out", type=Path, default=None,
                       help="write the JSON report here")
    return parser


def _sweep_config(args: argparse.Namespace) -> SweepConfig:
    if args.config is not None:
        cfg = load_sweep_config(args.config)
        return replace(cfg, output_dir=args.out, workers=args.workers)
    diag = DiagnosticsConfig(cap_K=args.cap_K, osc_deadband=args.osc_deadband,
                             max_steps=args.max_steps)
    return SweepConfig(
        equation=args.equation, scheme=args.scheme, bc=args.bc,
        dx_range=tuple(args.dx_range), dt_range=tuple(args.dt_range),
        resolution=args.resolution, ic=args.ic, length=args.length,
        final_time=args.final_time, mode_seed=args.mode_seed,
        diagnostics=diag, output_dir=args.out, emit=frozenset(args.emit),
        log_axes=args.log_axes, collapse_uo=args.collapse_uo,
        workers=args.workers,
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        cfg = _sweep_config(args)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    regime_map = run_sweep(cfg)
    audits = conjecture_audit(regime_map)
    try:
        written = write_outputs(regime_map, audits, cfg)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    counts = regime_map.code_counts(collapse_uo=cfg.collapse_uo)
    print(f"sweep {cfg.stem()}: {cfg.resolution}x{cfg.resolution} cells")
    print("  codes: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    for a in audits:
        print(f"  {a.conjecture_id}: {a.cells_consistent}/{a.cells_tested} "
              f"consistent ({100 * a.consistency:.1f}%)")
    so = so_region_report(regime_map)
    if so.get("cell_count"):
        line = f"  SO region: {so['cell_count']} cells"
        fit = so.get("front_fit")
        if fit:
            line += (f"; onset front dt = {fit['slope']:.4g}*dx + "
                     f"{fit['intercept']:.4g} (R^2 {fit['r_squared']:.3f})")
        print(line)
    for kind, path in written.items():
        print(f"  wrote {kind}: {path}")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    try:
        ibvp = default_ibvp(args.equation, args.bc, length=args.length,
                            final_time=args.final_time, ic=args.ic)
        diag = DiagnosticsConfig(cap_K=args.cap_K,
                                 osc_deadband=args.osc_deadband,
                                 max_steps=args.max_steps)
        flags, trace = run_simulation(ibvp, args.scheme, args.dx, args.dt,
                                      diag, mode_seed=args.mode_seed,
                                      collect_trace=True)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    stride = max(1, len(trace) // 20)
    print(f"solve {args.equation}/{args.scheme}/{args.bc} dx={args.dx} dt={args.dt}")
    print("  step        t        max|u|")
    for k, t, norm in trace[::stride]:
        print(f"  {k:6d}  {t:9.4g}  {norm:12.6g}")
    if trace[-1][0] % stride:
        k, t, norm = trace[-1]
        print(f"  {k:6d}  {t:9.4g}  {norm:12.6g}")
    print(f"  stable={flags.stable} oscillatory={flags.oscillatory} "
          f"monotone={flags.temporally_monotone}")
    if flags.diverged_at_step is not None:
        print(f"  diverged at step {flags.diverged_at_step}")
    print(f"  max inf-norm ratio: {flags.max_inf_norm_ratio:.6g}")
    if flags.monotonicity_limited:
        print("  note: runtime monotonicity cannot separate this equation's "
              "travelling wave from method oscillation; eigenvalue verdicts "
              "are authoritative")
    if args.out is not None and "png" in args.emit:
        try:
            args.out.mkdir(parents=True, exist_ok=True)
            path = args.out / f"solve_{args.equation}_{args.scheme}.png"
            _solution_figure(ibvp, args, trace, path)
            print(f"  wrote png: {path}")
        except OSError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return 2
    return 0


def _solution_figure(ibvp, args, trace, path: Path) -> None:
    from .figures import render_solution
    from .problems import sample_initial_condition
    from .schemes import StateVector, assemble, step as scheme_step

    mesh = build_mesh(ibvp.length, args.dx)
    u0 = sample_initial_condition(ibvp, mesh)
    freeze = None
    if ibvp.equation.is_nonlinear:
        freeze = spectral.worst_freeze_bound(
            args.scheme, ibvp.equation, args.dt / mesh.dx**2, args.dt,
            (float(u0.min()), float(u0.max()), 0.0, 1.0))
    scheme = assemble(args.scheme, ibvp.equation, mesh, args.dt, ibvp.bc,
                      u0=u0, freeze_bound=freeze)
    xs = (mesh.interior_positions if ibvp.bc.is_dirichlet
          else mesh.node_positions)
    total = max(1, min(len(trace) - 1, 400))
    marks = {0, total // 4, total // 2, 3 * total // 4, total}
    snapshots = [(0.0, xs, u0.copy())]
    state = StateVector(values=u0, time_index=0)
    for k in range(1, total + 1):
        state = scheme_step(scheme, state)
        if not np.all(np.isfinite(state.values)):
            break
        if k in marks:
            snapshots.append((k * args.dt, xs, state.values.copy()))
    render_solution(trace, snapshots,
                    f"{args.equation}/{args.scheme} dx={args.dx} dt={args.dt}",
                    path)


def _cmd_spectrum(args: argparse.Namespace) -> int:
    try:
        eq = equation_by_name(args.equation)
        mesh = build_mesh(args.length, args.dx)
        ibvp = default_ibvp(args.equation, args.bc, length=args.length,
                            final_time=args.final_time, ic=args.ic)
        from .schemes import frozen_surrogate

        freeze = 0.0
        if eq.is_nonlinear:
            freeze = spectral.worst_freeze_bound(
                args.scheme, eq, args.dt / mesh.dx**2, args.dt, (0.0, 1.0))
        scheme = frozen_surrogate(args.scheme, eq, mesh, args.dt, ibvp.bc, freeze)
        spec = spectral.scheme_spectrum(scheme)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    r = args.dt / mesh.dx**2
    print(f"spectrum {args.equation}/{args.scheme}/{args.bc} "
          f"dx={mesh.dx:.6g} dt={args.dt} r={r:.6g} N={scheme.n} "
          f"[{spec.source}]")
    if eq.is_nonlinear:
        print(f"  frozen at u = {freeze}")
    for lam in spec.eigenvalues:
        if abs(lam.imag) > 1e-14:
            print(f"  {lam.real:+.10f} {lam.imag:+.10f}i")
        else:
            print(f"  {lam.real:+.10f}")
    print(f"  spectral radius: {spectral.spectral_radius(spec):.10f}")
    print(f"  all real parts positive: {spectral.positive_real_test(spec)}")
    print(f"  positively dominated:    {spectral.dominance_test(spec)}")
    gs = [abs(spectral.von_neumann_factor(args.scheme, eq, r, args.dt, theta,
                                          freeze_bound=freeze if eq.is_nonlinear else None))
          for theta in np.linspace(0, np.pi, 181)]
    print(f"  max |g(theta)|: {max(gs):.10f} "
          f"(criterion <= 1 + {vn_slack(args.equation):g}*dt)")
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    try:
        data = read_csv(args.csv)
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    dx_axis = data["dx_axis"]
    dt_axis = data["dt_axis"]
    cfg = SweepConfig(
        equation=args.equation, scheme=args.scheme, bc=args.bc,
        dx_range=(float(dx_axis[0]), float(dx_axis[-1])),
        dt_range=(float(dt_axis[0]), float(dt_axis[-1])),
        resolution=len(dx_axis), ic=args.ic, length=args.length,
        final_time=args.final_time,
    )
    dx_eff = np.array([cfg.length / sweep_mesh_cells(cfg.length, dx)
                       for dx in dx_axis])
    shape = data["codes"].shape
    regime_map = RegimeMap(
        dx_axis=dx_axis, dt_axis=dt_axis, dx_effective=dx_eff,
        codes=data["codes"], min_re=data["min_re"], max_re=data["max_re"],
        rho=data["rho"], oscillatory=np.zeros(shape, dtype=bool),
        monotone=np.zeros(shape, dtype=bool),
        diverged=data["codes"] >= 2, curves=theoretical_curves(cfg),
        config=cfg,
    )
    audits = [a for a in conjecture_audit(regime_map)
              if a.conjecture_id != "C4"]
    print(f"audit of {args.csv} as {cfg.stem()}")
    for a in audits:
        print(f"  {a.conjecture_id}: {a.cells_consistent}/{a.cells_tested} "
              f"consistent ({100 * a.consistency:.1f}%) — {a.description}")
        for dx, dt, detail in a.counterexamples[:5]:
            print(f"    counterexample dx={dx:.6g} dt={dt:.6g}: {detail}")
        extra = len(a.counterexamples) - 5
        if extra > 0:
            print(f"    ... {extra} more recorded")
    print("  C4 requires runtime monotonicity flags; rerun `sweep` for it")
    so = so_region_report(regime_map)
    if so.get("cell_count"):
        print(f"  SO region: {so['cell_count']} cells")
    if args.out is not None:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            write_report(regime_map, audits, cfg, args.out)
            print(f"  wrote report: {args.out}")
        except OSError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "solve": _cmd_solve,
        "spectrum": _cmd_spectrum,
        "audit": _cmd_audit,
    }
    return handlers[args.command](args)


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
