"""Command-line driver: ``simulate``, ``oracle`` and ``compare``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, emit_config, parse_config, parse_config_text
from .deconvolution import ModelKind
from .io import RunManifest, load_run, write_comparison, write_outputs
from .solvers import SolverError
from .spectral import oracle_table

log = logging.getLogger("deconv_les")


def _model_override(sc, name: str | None, tau: float | None):
    if name is None:
        if tau is None:
            return sc
        models = [ModelKind.Deconv(tau, sc.dtau) if m.name == "deconv" else m for m in sc.models]
        return sc.with_models(dict.fromkeys(models) or [ModelKind.Deconv(tau, sc.dtau)])
    if name == "deconv":
        return sc.with_models([ModelKind.Deconv(5.0 if tau is None else tau, sc.dtau)])
    if tau is not None:
        raise ValueError("--tau only applies to --model deconv")
    return sc.with_models([ModelKind(name)])


def cmd_simulate(args) -> int:
    sc = parse_config(args.config)
    sc = _model_override(sc, args.model, args.tau)
    out = Path(args.out or f"runs/{sc.name}")
    grid = sc.build_grid()
    sim = sc.simulation(grid)
    config_text = emit_config(sc)
    manifests = {}
    for model in sc.models:
        run_dir = out / model.label
        run_dir.mkdir(parents=True, exist_ok=True)
        manifests[model.label] = RunManifest(config_text, model.label, sc.solver.rel_tol)
        manifests[model.label].write(run_dir)

    def fail(labels):
        for label in labels:
            manifests[label].status = "failed"
            manifests[label].write(out / label)

    t0 = time.perf_counter()
    try:
        initial = sim.stokes_state()
    except SolverError:
        fail(manifests)
        raise
    t_init = time.perf_counter() - t0
    finals = {}
    for model in sc.models:
        run_dir = out / model.label
        manifest = manifests[model.label]
        manifest.wall_time["stokes_init"] = t_init
        log.info("running %s (%d steps)", model.label, sc.time.n_steps)
        try:
            traj = sim.run(model, sc.time, initial=initial, output_every=sc.output_every)
        except SolverError:
            fail([model.label])
            raise
        traj.wall_time.pop("init", None)
        write_outputs(traj, manifest, run_dir, grid, sc.time.dt, sim.bc, sc.stations,
                      sc.n_profile, sc.vtk_every)
        finals[model.label] = traj.snapshots
        print(f"{model.label}: {len(traj.residual)} steps, "
              f"final energy {traj.energy[-1]:.6g}, output {run_dir}")
    if "dns" in finals and len(finals) > 1:
        write_comparison(out, grid, finals, "dns", sim.bc, sc.stations, sc.n_profile)
        print(f"comparison tables in {out}")
    return 0


def cmd_oracle(args) -> int:
    if args.tau < 0:
        raise ValueError("tau must be ≥ 0")
    if args.modes < 1:
        raise ValueError("--modes must be >= 1")
    if args.n is not None and args.modes > args.n // 2:
        raise ValueError(f"mode index exceeds Nyquist limit {args.n // 2}")
    rows = oracle_table(args.alpha, args.tau, args.modes, args.length, args.n)
    stream = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(stream)
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([r["k"]] + [repr(float(r[c])) for c in list(r)[1:]])
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


def cmd_compare(args) -> int:
    runs, scenario = {}, None
    for d in args.runs:
        d = Path(d)
        man = d / "manifest.txt"
        if not (d / "fields.npz").exists() or not man.exists():
            raise ValueError(f"{d}: not a run directory (missing fields.npz or manifest.txt)")
        sc = parse_config_text(man.read_text(), str(man))
        if scenario is None:
            scenario = sc
        elif (sc.nx, sc.nz, sc.Lx, sc.h, sc.bump) != (scenario.nx, scenario.nz, scenario.Lx,
                                                        scenario.h, scenario.bump):
            raise ValueError(f"{d}: grid differs from {args.runs[0]}")
        data = load_run(d)
        runs[data.label] = data.snapshots
    reference = args.reference or ("dns" if "dns" in runs else next(iter(runs)))
    if reference not in runs:
        raise ValueError(f"reference {reference!r} not among runs {sorted(runs)}")
    counts = {len(s) for s in runs.values()}
    if len(counts) != 1:
        raise ValueError("runs have different numbers of snapshots")
    grid = scenario.build_grid()
    bc = scenario.boundary(grid)
    out = Path(args.out or ".")
    write_comparison(out, grid, runs, reference, bc, scenario.stations, scenario.n_profile)
    with open(out / "errors.csv") as fh:
        sys.stdout.write(fh.read())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deconv-les", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--model", choices=["dns", "leray", "deconv"])
    p.add_argument("--tau", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="closed-form filter/deconvolution table (CSV)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--n", type=int, help="grid cells: use the 5-point eigenvalues")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="error tables and profiles between runs")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--reference")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SolverError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
