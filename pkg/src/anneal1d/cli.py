"""Command-line front end.

Subcommands map onto the library's main operations:

    phase-diagram   minima counts over an (h0, w0) sweep -> CSV
    eigen           E0/E1/gap over a mass list -> CSV
    qa-run          quantum annealing sweep over T -> summary + traces
    sa-run          classical linear-schedule sweep over T -> summary + traces
    sa-log          classical logarithmic-schedule run -> series + fit
    fit             power-law exponent of a summary CSV
    stages          print and cross-check the stage boundary table

All numeric output is CSV with fixed column orders (documented per
subcommand in --help); the process exits nonzero on any cross-check
failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .experiments import (
    ConfigError,
    CrossCheckError,
    ExperimentConfig,
    boundary_rows,
    fit_power_law,
    run_experiment,
    stage_table,
)
from .potential import PotentialParams, phase_diagram


def _parse_range(spec: str, log_spaced: bool = False) -> list[float]:
    """'lo:hi:n' -> n values (log-spaced if asked); 'a,b,c' -> literal list."""
    if ":" in spec:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
        if log_spaced:
            return list(np.geomspace(lo, hi, n))
        return list(np.linspace(lo, hi, n))
    return [float(s) for s in spec.split(",")]


def _cmd_phase_diagram(args) -> int:
    h0 = _parse_range(args.h0)
    w0 = _parse_range(args.w0)
    cells = phase_diagram((min(h0), max(h0)), (min(w0), max(w0)), (len(h0), len(w0)))
    with open(args.out, "w") as f:
        f.write("w0,h0,n_min\n")
        for c in cells:
            f.write(f"{c.w0!r},{c.h0!r},{c.n_min}\n")
    print(f"wrote {len(cells)} cells to {args.out}")
    return 0


def _cmd_eigen(args) -> int:
    from .eigensolver import lowest_eigenpairs
    from .grid import converged_grid

    params = PotentialParams(k=args.k, h0=args.h0, w0=args.w0)
    masses = _parse_range(args.mass, log_spaced=True)
    rows = []
    for m in masses:
        g = converged_grid(params, m, m)
        r = lowest_eigenpairs(g, params, m, count=max(2, args.count))
        rows.append((m, r.energies[0], r.energies[1], r.energies[1] - r.energies[0]))
    with open(args.out, "w") as f:
        f.write("mass,E0,E1,gap\n")
        for row in rows:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {len(rows)} masses to {args.out}")
    return 0


def _cmd_qa_run(args) -> int:
    config = ExperimentConfig(
        kind="quantum",
        stage=args.stage,
        schedule=args.schedule,
        T_list=tuple(sorted(_parse_range(args.T))),
        dt=args.dt,
        integrator=args.integrator,
        n_snapshots=args.snapshots,
        seed=args.seed,
        out_dir=args.out,
    )
    curve = run_experiment(config)
    if args.dump_final:
        from pathlib import Path

        for T, traj in zip(curve.T, curve.traces):
            psi = traj.final_state
            path = Path(args.out) / f"final_T{T:g}.csv"
            with open(path, "w") as f:
                f.write("x,re,im\n")
                for x, v in zip(psi.grid.points, psi.values):
                    f.write(f"{x!r},{v.real!r},{v.imag!r}\n")
    for T, r in zip(curve.T, curve.residual):
        print(f"T={T:g} residual={r:.6e}")
    if curve.fit:
        print(f"fit ({curve.fit_mode}): exponent={curve.fit.exponent:+.4f}")
    return 0


def _cmd_sa_run(args) -> int:
    config = ExperimentConfig(
        kind="classical",
        stage=args.stage,
        schedule="linear",
        T_list=tuple(sorted(_parse_range(args.T))),
        step_size=args.s,
        n_particles=args.N,
        seed=args.seed,
        out_dir=args.out,
    )
    curve = run_experiment(config)
    for T, r, lo, hi in zip(curve.T, curve.residual, curve.lo, curve.hi):
        print(f"T={T:g} residual={r:.6e} [{lo:.6e}, {hi:.6e}]")
    if curve.fit:
        print(f"fit ({curve.fit_mode}): exponent={curve.fit.exponent:+.4f}")
    return 0


def _cmd_sa_log(args) -> int:
    config = ExperimentConfig(
        kind="classical",
        schedule="logarithmic",
        beta_i=args.beta_i,
        t_max=args.tmax,
        step_size=args.s,
        n_particles=args.N,
        seed=args.seed,
        out_dir=args.out,
    )
    result = run_experiment(config)
    print(
        f"alpha={result.fit.exponent:+.4f} over log10log10 t in "
        f"[{result.fit.window[0]:.3f}, {result.fit.window[1]:.3f}], "
        f"beta_final={result.beta_final:.4f}"
    )
    return 0


def _cmd_fit(args) -> int:
    rows = []
    with open(args.input) as f:
        for line in f:
            if line.startswith("#"):
                continue
            parts = line.strip().split(",")
            if not parts or not parts[0]:
                continue
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                continue  # header row
    fit = fit_power_law(rows, mode=args.mode)
    print(
        f"exponent={fit.exponent:+.6f} window=[{fit.window[0]:g}, {fit.window[1]:g}] "
        f"r2={fit.residual:.6f}"
    )
    return 0


def _cmd_stages(args) -> int:
    print("label  log10(m)  E0 computed    E0 reference   "
          "log10(beta)  U computed     U reference")
    try:
        rows = boundary_rows()
        for r in rows:
            print(
                f"  {r.label}    {np.log10(r.mass):8.2f}  {r.e0_computed:.7f}  "
                f"{r.e0_reference:.7f}      {np.log10(r.beta):5.2f}   "
                f"{r.u_computed:.7f}  {r.u_reference:.7f}"
            )
        stage_table()
    except CrossCheckError as exc:
        print(f"CROSS-CHECK FAILED: {exc}", file=sys.stderr)
        return 1
    print("all boundary energies reproduce within 1e-6; quantum/classical "
          "pairing agrees within 1.5%")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="anneal1d",
        description="Quantum vs classical annealing of a 1D corrugated well.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-diagram", help="minima-count sweep; CSV columns w0,h0,n_min")
    p.add_argument("--h0", required=True, help="lo:hi:n or comma list")
    p.add_argument("--w0", required=True, help="lo:hi:n or comma list")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_phase_diagram)

    p = sub.add_parser("eigen", help="eigenpairs per mass; CSV columns mass,E0,E1,gap")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--h0", type=float, required=True)
    p.add_argument("--w0", type=float, required=True)
    p.add_argument("--mass", required=True, help="comma list, or lo:hi:n (log-spaced)")
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eigen)

    p = sub.add_parser(
        "qa-run",
        help="quantum sweep; trace CSVs t,energy,width,x0,j0 and summary T,residual_energy",
    )
    p.add_argument("--stage", required=True, choices=["1", "2", "3"])
    p.add_argument(
        "--schedule", default="linear",
        choices=["linear", "poly2", "poly3", "poly4", "quadratic"],
    )
    p.add_argument("--T", required=True, help="comma list of total annealing times")
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--integrator", default="split_step", choices=["split_step", "rk4"])
    p.add_argument("--snapshots", type=int, default=0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--dump-final", action="store_true",
                   help="also write final wavefunctions as CSV x,re,im")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_qa_run)

    p = sub.add_parser(
        "sa-run",
        help="classical linear sweep; trace CSVs t,avgV,lo,hi and summary T,residual,lo,hi",
    )
    p.add_argument("--stage", required=True, choices=["A", "B", "C"])
    p.add_argument("--s", type=float, required=True, help="Metropolis step size")
    p.add_argument("--N", type=int, required=True, help="ensemble size")
    p.add_argument("--T", required=True, help="comma list of total annealing times")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sa_run)

    p = sub.add_parser(
        "sa-log",
        help="classical logarithmic run; summary CSV t,avgV,lo,hi plus fitted exponent",
    )
    p.add_argument("--beta-i", dest="beta_i", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sa_log)

    p = sub.add_parser("fit", help="power-law exponent of a summary CSV (T,residual)")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", default="crests", choices=["crests", "all_points"])
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("stages", help="print the stage boundary table and cross-check it")
    p.set_defaults(func=_cmd_stages)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
