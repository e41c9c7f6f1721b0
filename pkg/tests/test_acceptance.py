"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary.  Run alone with ``pytest tests/test_acceptance.py -s``.
"""

import filecmp
import time
from dataclasses import replace

import numpy as np
import pytest
from conftest import record_criterion

from deconv_les.deconvolution import FilterParams, ModelKind
from deconv_les.diagnostics import l2_relative_error
from deconv_les.grid import BoundarySpec, FaceKind, GridSpec, VelocityField, build_grid, divergence
from deconv_les.io import RunManifest, write_outputs
from deconv_les.scenarios import Bump, bump_mask, builtin_bathymetry, builtin_cavity
from deconv_les.solvers import SolverParams, project
from deconv_les.spectral import (
    deconv_oracle_history,
    exact_deconv_coeff,
    exact_filter_coeff,
    filter_oracle,
    oracle_grid,
    van_cittert_coeff,
)
from deconv_les.config import emit_config
from deconv_les.timestepper import FluidParams, SimState, Simulation, TimeParams
from deconv_les.wind import WindStress, build_psi

pytestmark = pytest.mark.slow

CAVITY_MODELS = (ModelKind.DNS(), ModelKind.LerayAlpha(), ModelKind.Deconv(5), ModelKind.Deconv(20))
INVARIANT_RUNS: dict[str, tuple] = {}


def _keep_invariants(tag, traj, rel_tol):
    INVARIANT_RUNS[f"{tag}/{traj.model.label}"] = (
        np.array(traj.max_div), np.array(traj.vel_norm), np.array(traj.trace_error), rel_tol
    )


# -- 1 ----------------------------------------------------------------------
def test_c01_spectral_filter_oracle():
    t0 = time.perf_counter()
    grid = oracle_grid(64, 32)
    kmax = grid.nx // 4  # Nyquist/2
    devs = [filter_oracle(grid, a, range(1, kmax + 1), 1e-8).max_rel_dev for a in (0.05, 0.1, 0.2)]
    elapsed = time.perf_counter() - t0
    ok = max(devs) <= 1e-8 and elapsed < 5.0
    record_criterion(1, "spectral filter oracle", ok,
                     f"max rel dev {max(devs):.2e} (tol 1e-8), k<={kmax}, {elapsed:.2f}s (<5s)")
    assert ok


# -- 2 ----------------------------------------------------------------------
def test_c02_van_cittert_equivalence():
    t0 = time.perf_counter()
    grid = oracle_grid(64, 32)
    worst = 0.0
    for alpha in (0.05, 0.1, 0.2):
        for k in (1, 4, 8, 16):
            mode, coeffs = deconv_oracle_history(grid, alpha, k, 20, 1.0)
            g = exact_filter_coeff(mode.lam, alpha)
            expected = np.array([van_cittert_coeff(g, n) for n in range(21)])
            worst = max(worst, np.abs(np.array(coeffs) - expected).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    record_criterion(2, "Van Cittert equivalence", ok,
                     f"max dev {worst:.2e} over N<=20 (tol 1e-10), {elapsed:.2f}s (<5s)")
    assert ok


# -- 3 ----------------------------------------------------------------------
def test_c03_continuous_tau_consistency():
    grid = oracle_grid(64, 32)
    alpha, k, tau = 0.2, 8, 20.0
    errs = []
    for dtau in (1.0, 0.5, 0.25, 0.125):
        mode, coeffs = deconv_oracle_history(grid, alpha, k, tau, dtau)
        errs.append(abs(coeffs[-1] - exact_deconv_coeff(mode.lam, tau, alpha)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = bool(np.all(np.abs(orders - 1.0) <= 0.15))
    record_criterion(3, "continuous-tau consistency", ok,
                     "orders " + ", ".join(f"{o:.3f}" for o in orders) + " (1.0 +- 0.15)")
    assert ok


# -- 4 ----------------------------------------------------------------------
def _bump_grid(nx, nz):
    return build_grid(GridSpec(nx, nz, 1.0, 0.5, bump_mask(nx, nz, 1.0, 0.5, Bump(0.2, 0.15))))


def test_c04_lifting_field():
    wind = WindStress()
    traces_ok, slope_ok = True, True
    slope_err = 0.0
    for grid in (build_grid(GridSpec(32, 16)), build_grid(GridSpec(64, 32)), _bump_grid(50, 25),
                 _bump_grid(100, 50)):
        psi = build_psi(wind, grid)
        traces_ok &= bool(np.all(psi.psi_h[grid.u_kind != FaceKind.FREE] == 0.0))
        traces_ok &= bool(np.all(psi.psi_v[grid.w_kind != FaceKind.FREE] == 0.0))
        # surface slope from a quadratic through the three top samples of each column
        z = grid.z_centers[-3:]
        cols = slice(1, -1)
        coeffs = np.polynomial.polynomial.polyfit(z, psi.psi_h[cols, -3:].T, 2)
        err = np.abs(coeffs[1] - wind(grid.x_nodes[cols])).max()
        slope_err = max(slope_err, err / grid.dz**2)
        slope_ok &= err <= grid.dz**2 * np.abs(wind(grid.x_nodes)).max()
    divs = []
    for nz in (64, 128, 256):
        g = build_grid(GridSpec(2 * nz, nz))
        divs.append(np.abs(divergence(g, build_psi(wind, g).as_velocity())).max())
    orders = np.log2(np.array(divs[:-1]) / np.array(divs[1:]))
    order_ok = bool(np.all(orders >= 1.9))
    ok = traces_ok and slope_ok and order_ok
    record_criterion(4, "lifting field", ok,
                     f"traces exact={traces_ok}, slope err/dz^2 {slope_err:.1e}, div orders "
                     + ", ".join(f"{o:.2f}" for o in orders) + " (>=1.9)")
    assert ok


# -- 5 ----------------------------------------------------------------------
def test_c05_energy_inequality():
    grid = build_grid(GridSpec(64, 32, 1.0, 0.5))
    solver = SolverParams()
    rng = np.random.default_rng(2024)
    v0 = VelocityField(rng.standard_normal(grid.shape("u")), rng.standard_normal(grid.shape("w")))
    v0 = project(grid, grid.apply_bc(v0), SolverParams(rel_tol=1e-12))
    sim = Simulation(grid, BoundarySpec(), None, FluidParams(1e-3), FilterParams(0.1), solver)
    init = SimState(0.0, v0, np.zeros(grid.shape("scalar")))
    t0 = time.perf_counter()
    worst = -np.inf
    for model in (ModelKind.DNS(), ModelKind.LerayAlpha(), ModelKind.Deconv(5)):
        traj = sim.run(model, TimeParams(0.2, 40.0), initial=init, output_every=200)
        assert len(traj.energy) == 201
        worst = max(worst, float(np.max(np.diff(traj.energy))))
        _keep_invariants("energy", traj, solver.rel_tol)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.0 and elapsed < 120.0
    record_criterion(5, "energy inequality", ok,
                     f"max E(n+1)-E(n) = {worst:.2e} over 200 steps x 3 models, {elapsed:.1f}s (<120s)")
    assert ok


# -- 6 and 10 ---------------------------------------------------------------
def _cavity_scenario():
    return replace(builtin_cavity(), nx=64, nz=32, time=TimeParams(0.2, 30.0), models=CAVITY_MODELS)


def _run_cavity(out_dir):
    sc = _cavity_scenario()
    grid = sc.build_grid()
    sim = sc.simulation(grid)
    init = sim.stokes_state()
    trajs = {}
    for model in sc.models:
        traj = sim.run(model, sc.time, initial=init, output_every=sc.output_every)
        man = RunManifest(emit_config(sc), model.label, sc.solver.rel_tol)
        write_outputs(traj, man, out_dir / model.label, grid, sc.time.dt, sim.bc, sc.stations,
                      sc.n_profile)
        trajs[model.label] = traj
    return sc, grid, trajs


@pytest.fixture(scope="module")
def cavity_runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("cavity_a")
    t0 = time.perf_counter()
    sc, grid, trajs = _run_cavity(out)
    elapsed = time.perf_counter() - t0
    for traj in trajs.values():
        _keep_invariants("cavity", traj, sc.solver.rel_tol)
    return out, grid, trajs, elapsed


def test_c06_tau_convergence_ordering(cavity_runs):
    _, grid, trajs, elapsed = cavity_runs
    ref = trajs["dns"].snapshots[1:]
    err = {k: l2_relative_error(grid, trajs[k].snapshots[1:], ref)
           for k in ("leray", "deconv_tau5", "deconv_tau20")}
    e0, e5, e20 = err["leray"], err["deconv_tau5"], err["deconv_tau20"]
    ok = e20 < e5 < e0 and e0 / e20 >= 2.0 and elapsed < 1800
    record_criterion(6, "tau-convergence ordering", ok,
                     f"err leray {e0:.3f}%, tau5 {e5:.3f}%, tau20 {e20:.4f}%, "
                     f"ratio {e0 / e20:.1f} (>=2), {elapsed:.0f}s (<1800s)")
    assert ok


# -- 7 ----------------------------------------------------------------------
def test_c07_model_nesting():
    sc = replace(builtin_cavity(), nx=64, nz=32)
    grid = sc.build_grid()
    sim = sc.simulation(grid)
    init = sim.stokes_state()
    tp = TimeParams(0.2, 10.0)
    a = sim.run(ModelKind.LerayAlpha(), tp, initial=init, output_every=1)
    b = sim.run(ModelKind.Deconv(0), tp, initial=init, output_every=1)
    same = len(a.snapshots) == len(b.snapshots) == 51 and all(
        np.array_equal(x.u, y.u) and np.array_equal(x.w, y.w) and np.array_equal(p, q)
        for x, y, p, q in zip(a.snapshots, b.snapshots, a.pressures, b.pressures)
    )
    _keep_invariants("nesting", a, sc.solver.rel_tol)
    _keep_invariants("nesting", b, sc.solver.rel_tol)
    record_criterion(7, "model nesting", same, f"Deconv(0) vs Leray-alpha bitwise identical over 50 steps: {same}")
    assert same


# -- 9 ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def bathymetry_runs():
    sc = builtin_bathymetry()
    grid = sc.build_grid()
    sim = sc.simulation(grid)
    t0 = time.perf_counter()
    init = sim.stokes_state()
    trajs = {m.label: sim.run(m, sc.time, initial=init, output_every=50) for m in sc.models}
    elapsed = time.perf_counter() - t0
    for traj in trajs.values():
        _keep_invariants("bathymetry", traj, sc.solver.rel_tol)
    return sc, trajs, elapsed


def test_c09_bathymetry_residual_ordering(bathymetry_runs):
    sc, trajs, elapsed = bathymetry_runs
    window = 50  # last 1 s of the 10 s run
    mean = {k: float(np.mean(t.residual[-window:])) for k, t in trajs.items()}
    bounded = all(np.all(np.isfinite(t.residual)) and max(t.residual) < 10 * max(t.residual[:window])
                  for k, t in trajs.items() if k != "dns")
    r_dns, r_leray, r_dec = mean["dns"], mean["leray"], mean["deconv_tau5"]
    ok = bounded and r_dec <= r_leray and r_leray < r_dns and r_dec < r_dns and elapsed < 2700
    record_criterion(9, "bathymetry residual ordering", ok,
                     f"final-window mean residual dns {r_dns:.4f}, leray {r_leray:.4f}, "
                     f"deconv5 {r_dec:.4f}; bounded={bounded}; {elapsed:.0f}s (<2700s)")
    assert ok


# -- 10 ---------------------------------------------------------------------
def test_c10_determinism(cavity_runs, tmp_path_factory):
    out_a = cavity_runs[0]
    out_b = tmp_path_factory.mktemp("cavity_b")
    _run_cavity(out_b)
    names = ["energy.csv", "residual.csv", "invariants.csv", "profiles.csv"]
    labels = [m.label for m in CAVITY_MODELS]
    diffs = [f"{k}/{n}" for k in labels for n in names
             if not filecmp.cmp(out_a / k / n, out_b / k / n, shallow=False)]
    ok = not diffs
    record_criterion(10, "determinism", ok,
                     f"{len(labels) * len(names)} CSV files compared, differing: {diffs or 'none'}")
    assert ok


# -- 8 (runs last: collects every trajectory above) -------------------------
def test_c08_divergence_and_trace_invariants():
    assert INVARIANT_RUNS, "no acceptance runs recorded"
    worst_div, worst_trace, n_steps = 0.0, 0.0, 0
    for max_div, vel_norm, trace, rel_tol in INVARIANT_RUNS.values():
        ratio = max_div / np.maximum(vel_norm, 1e-300)
        worst_div = max(worst_div, float(ratio.max()) / (10 * rel_tol))
        worst_trace = max(worst_trace, float(trace.max()))
        n_steps += len(max_div)
    ok = worst_div <= 1.0 and worst_trace == 0.0
    record_criterion(8, "divergence and BC invariants", ok,
                     f"{len(INVARIANT_RUNS)} runs, {n_steps} states: max |div|/(10 rel_tol ||v||) "
                     f"{worst_div:.2e}, max trace error {worst_trace:.1e}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
