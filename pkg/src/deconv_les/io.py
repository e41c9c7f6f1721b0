"""CSV diagnostics, legacy ASCII VTK snapshots and the run manifest."""

from __future__ import annotations

import csv
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import l2_relative_error, vertical_profile
from .grid import BoundarySpec, Grid, VelocityField, padded_components
from .timestepper import Trajectory


def _write_csv(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror}") from err
    return path


def _f(x) -> str:
    return repr(float(x))


def node_values(grid: Grid, v: VelocityField, p: np.ndarray, bc: BoundarySpec | None = None):
    """u, w and p interpolated to the (nx+1) x (nz+1) grid nodes."""
    u_pad, w_pad = padded_components(grid, v, bc)
    un = 0.5 * (u_pad[:, :-1] + u_pad[:, 1:])
    wn = 0.5 * (w_pad[:-1] + w_pad[1:])
    weights = np.zeros((grid.nx + 2, grid.nz + 2))
    vals = np.zeros_like(weights)
    weights[1:-1, 1:-1] = grid.fluid
    vals[1:-1, 1:-1] = np.where(grid.fluid, p, 0.0)
    wsum = weights[:-1, :-1] + weights[1:, :-1] + weights[:-1, 1:] + weights[1:, 1:]
    vsum = vals[:-1, :-1] + vals[1:, :-1] + vals[:-1, 1:] + vals[1:, 1:]
    pn = np.divide(vsum, wsum, out=np.zeros_like(vsum), where=wsum > 0)
    return un, wn, pn


def write_vtk(path, grid: Grid, v: VelocityField, p: np.ndarray, bc=None, title="deconv-les"):
    """Legacy ASCII STRUCTURED_GRID; solid cells are flagged in vtkGhostType."""
    un, wn, pn = node_values(grid, v, p, bc)
    nxn, nzn = grid.nx + 1, grid.nz + 1
    X, Z = np.meshgrid(grid.x_nodes, grid.z_nodes, indexing="ij")
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {nxn} {nzn} 1",
        f"POINTS {nxn * nzn} double",
    ]
    # VTK ordering: x fastest
    for j in range(nzn):
        for i in range(nxn):
            lines.append(f"{float(X[i, j])!r} {float(Z[i, j])!r} 0.0")
    lines += [f"CELL_DATA {grid.nx * grid.nz}", "SCALARS vtkGhostType unsigned_char 1",
              "LOOKUP_TABLE default"]
    lines += ["32" if grid.solid[i, j] else "0" for j in range(grid.nz) for i in range(grid.nx)]
    lines.append(f"POINT_DATA {nxn * nzn}")
    for name, arr in (("u", un), ("w", wn), ("p", pn)):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(arr[i, j])) for j in range(nzn) for i in range(nxn)]
    lines.append("VECTORS velocity double")
    lines += [f"{float(un[i, j])!r} {float(wn[i, j])!r} 0.0" for j in range(nzn) for i in range(nxn)]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror}") from err
    return path


def read_vtk_point_count(path) -> int:
    for line in Path(path).read_text().splitlines():
        if line.startswith("POINTS"):
            return int(line.split()[1])
    raise ValueError(f"{path}: no POINTS section")


@dataclass
class RunManifest:
    config_text: str
    model: str
    rel_tol: float
    status: str = "running"
    outputs: list[str] = field(default_factory=list)
    wall_time: dict[str, float] = field(default_factory=dict)

    def render(self) -> str:
        head = [
            f"# model: {self.model}",
            f"# status: {self.status}",
            f"# solver rel_tol: {self.rel_tol!r}",
            f"# python: {platform.python_version()}",
            f"# numpy: {np.__version__}",
        ]
        try:
            import scipy

            head.append(f"# scipy: {scipy.__version__}")
        except ImportError:  # pragma: no cover
            pass
        head += [f"# wall_time {k}: {v:.3f} s" for k, v in self.wall_time.items()]
        head += [f"# output: {o}" for o in self.outputs]
        return "\n".join(head) + "\n" + self.config_text

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / "manifest.txt"
        try:
            path.write_text(self.render())
        except OSError as err:
            raise OSError(f"cannot write {path}: {err.strerror}") from err
        return path


def write_outputs(
    traj: Trajectory,
    manifest: RunManifest,
    out_dir,
    grid: Grid,
    dt: float,
    bc: BoundarySpec | None = None,
    stations=(0.5,),
    n_profile: int = 51,
    vtk_every: int = 0,
) -> list[Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"cannot create {out}: {err.strerror}") from err
    files = []
    t0 = traj.times[0]
    step_t = [t0 + k * dt for k in range(len(traj.energy))]
    files.append(_write_csv(out / "energy.csv", ["step", "t", "energy"],
                            [[k, _f(step_t[k]), _f(e)] for k, e in enumerate(traj.energy)]))
    files.append(_write_csv(out / "residual.csv", ["step", "t", "residual"],
                            [[k + 1, _f(step_t[k + 1]), _f(r)] for k, r in enumerate(traj.residual)]))
    files.append(_write_csv(
        out / "invariants.csv", ["step", "max_div", "vel_norm", "trace_error"],
        [[k, _f(d), _f(n), _f(t)] for k, (d, n, t) in
         enumerate(zip(traj.max_div, traj.vel_norm, traj.trace_error))]))
    rows = []
    for x0 in stations:
        prof = vertical_profile(grid, traj.final, x0, n_profile, bc)
        rows += [[_f(x0), _f(z), _f(u)] for z, u in zip(prof.z, prof.values)]
    files.append(_write_csv(out / "profiles.csv", ["x0", "z", "u"], rows))

    np.savez(
        out / "fields.npz",
        times=np.array(traj.times),
        steps=np.array(traj.snapshot_steps),
        u=np.array([s.u for s in traj.snapshots]),
        w=np.array([s.w for s in traj.snapshots]),
        p=np.array(traj.pressures),
    )
    files.append(out / "fields.npz")
    last = len(traj.snapshots) - 1
    for n, (v, p, step) in enumerate(zip(traj.snapshots, traj.pressures, traj.snapshot_steps)):
        if n in (0, last) or (vtk_every and step % vtk_every == 0):
            files.append(write_vtk(out / f"fields_{step:05d}.vtk", grid, v, p, bc))
    manifest.outputs = [str(f.name) for f in files]
    manifest.wall_time.update(traj.wall_time)
    manifest.status = "complete"
    manifest.write(out)
    return files


@dataclass
class RunData:
    label: str
    times: np.ndarray
    steps: np.ndarray
    snapshots: list[VelocityField]


def load_run(run_dir) -> RunData:
    run_dir = Path(run_dir)
    data = np.load(run_dir / "fields.npz")
    label = run_dir.name
    man = run_dir / "manifest.txt"
    if man.exists():
        for line in man.read_text().splitlines():
            if line.startswith("# model:"):
                label = line.split(":", 1)[1].strip()
    snaps = [VelocityField(u, w) for u, w in zip(data["u"], data["w"])]
    return RunData(label, data["times"], data["steps"], snaps)


def error_table(grid: Grid, runs: dict[str, list[VelocityField]], reference: str):
    """(label, percent error vs reference) skipping the shared initial snapshot."""
    ref = runs[reference]
    rows = []
    for label, snaps in runs.items():
        if label == reference:
            continue
        a, b = snaps[1:] or snaps, ref[1:] or ref
        rows.append((label, l2_relative_error(grid, a, b)))
    return rows


def write_comparison(out_dir, grid: Grid, runs: dict[str, list[VelocityField]], reference: str,
                     bc=None, stations=(0.5,), n_profile: int = 51) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[label, _f(_tau_of(label)), _f(err)] for label, err in error_table(grid, runs, reference)]
    files = [_write_csv(out / "errors.csv", ["model", "tau", "l2_error_percent"], rows)]
    labels = list(runs)
    prof_rows = []
    for x0 in stations:
        profs = [vertical_profile(grid, runs[k][-1], x0, n_profile, bc) for k in labels]
        for n, z in enumerate(profs[0].z):
            prof_rows.append([_f(x0), _f(z)] + [_f(p.values[n]) for p in profs])
    files.append(_write_csv(out / "profiles.csv", ["x0", "z"] + labels, prof_rows))
    return files


def _tau_of(label: str) -> float:
    if label.startswith("deconv_tau"):
        return float(label[len("deconv_tau"):].split("_")[0])
    return 0.0 if label == "leray" else float("nan")
