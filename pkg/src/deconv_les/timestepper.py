"""Semi-implicit integrator: characteristics, implicit diffusion, projection."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .deconvolution import FilterParams, ModelKind, compute_transport_velocity
from .grid import (
    BoundarySpec,
    Grid,
    VelocityField,
    clamp_to_fluid,
    divergence,
    gradient,
    interpolate_component,
    interpolate_velocity,
    padded_components,
)
from .solvers import SolverError, SolverParams, project_with_pressure, solve_helmholtz
from .wind import LiftField

log = logging.getLogger(__name__)

Forcing = Callable[[float], VelocityField]


@dataclass(frozen=True)
class TimeParams:
    dt: float
    T: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.T < 0:
            raise ValueError("T must be >= 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class FluidParams:
    nu: float = 1e-3

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be > 0")


@dataclass(eq=False)
class SimState:
    t: float
    vel: VelocityField
    p: np.ndarray
    step: int = 0


def trace_characteristic(
    grid: Grid,
    x,
    z,
    wstar: VelocityField,
    dt: float,
    bc: BoundarySpec | None = None,
    padded=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Backward foot of the characteristic by the two-stage midpoint rule."""
    padded = padded if padded is not None else padded_components(grid, wstar, bc)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    u1, w1 = interpolate_velocity(grid, wstar, x, z, padded=padded)
    xm, zm = clamp_to_fluid(grid, x - 0.5 * dt * u1, z - 0.5 * dt * w1)
    u2, w2 = interpolate_velocity(grid, wstar, xm, zm, padded=padded)
    return clamp_to_fluid(grid, x - dt * u2, z - dt * w2)


def advect(
    grid: Grid,
    v: VelocityField,
    wstar: VelocityField,
    dt: float,
    bc: BoundarySpec | None = None,
    wstar_bc: BoundarySpec | None = None,
) -> VelocityField:
    """Sample every free face of ``v`` at its characteristic foot."""
    bc = bc or BoundarySpec()
    w_pad = padded_components(grid, wstar, wstar_bc if wstar_bc is not None else bc)
    v_pad = padded_components(grid, v, bc)
    out = grid.apply_bc(grid.zeros_velocity(), bc)
    for name, arr_pad in (("u", v_pad[0]), ("w", v_pad[1])):
        free = grid.free(name)
        X, Z = grid.coords(name)
        xf, zf = trace_characteristic(grid, X[free], Z[free], wstar, dt, padded=w_pad)
        x_c, z_c = clamp_to_fluid(grid, xf, zf)
        out.component(name)[free] = interpolate_component(grid, arr_pad, name, x_c, z_c)
    return out


def diffuse_and_project(
    grid: Grid,
    v_tilde: VelocityField,
    dt: float,
    fluid: FluidParams,
    bc: BoundarySpec,
    solver: SolverParams | None = None,
    forcing: VelocityField | None = None,
    p_old: np.ndarray | None = None,
    q0: np.ndarray | None = None,
) -> tuple[VelocityField, np.ndarray]:
    """Implicit viscous step with the wind-stress Neumann data, then projection.

    With ``p_old`` the old pressure gradient enters the momentum solve and the
    projection returns an increment (incremental pressure correction).
    """
    rhs = v_tilde * (1.0 / dt)
    if forcing is not None:
        rhs = rhs + forcing
    if p_old is not None:
        gx, gz = gradient(grid, p_old)
        rhs = rhs - VelocityField(gx, gz)
    v_star = VelocityField(
        solve_helmholtz(grid, 1.0 / dt, fluid.nu, rhs.u, bc, "u", solver),
        solve_helmholtz(grid, 1.0 / dt, fluid.nu, rhs.w, bc, "w", solver),
    )
    v_new, q = project_with_pressure(grid, v_star, solver, q0=q0)
    p = q / dt if p_old is None else p_old + q / dt
    return v_new, p


@dataclass
class Trajectory:
    model: ModelKind
    times: list[float] = field(default_factory=list)
    snapshots: list[VelocityField] = field(default_factory=list)
    pressures: list[np.ndarray] = field(default_factory=list)
    snapshot_steps: list[int] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    max_div: list[float] = field(default_factory=list)
    vel_norm: list[float] = field(default_factory=list)
    trace_error: list[float] = field(default_factory=list)
    wall_time: dict[str, float] = field(default_factory=dict)

    @property
    def final(self) -> VelocityField:
        return self.snapshots[-1]


@dataclass(eq=False)
class Simulation:
    grid: Grid
    bc: BoundarySpec
    psi: LiftField | None
    fluid: FluidParams = field(default_factory=FluidParams)
    filt: FilterParams = field(default_factory=FilterParams)
    solver: SolverParams = field(default_factory=SolverParams)
    forcing: Forcing | None = None
    stokes_tol: float = 1e-8
    stokes_max_iter: int = 2000

    def transport_velocity(self, v: VelocityField, model: ModelKind) -> VelocityField:
        return compute_transport_velocity(self.grid, v, model, self.psi, self.filt, self.solver)

    def _forcing(self, t: float) -> VelocityField | None:
        return None if self.forcing is None else self.forcing(t)

    def step(self, state: SimState, model: ModelKind, dt: float) -> tuple[SimState, VelocityField]:
        """Advance one step; also returns the transport velocity used."""
        wstar = self.transport_velocity(state.vel, model)
        v_tilde = advect(self.grid, state.vel, wstar, dt, self.bc)
        t_new = state.t + dt
        vel, p = diffuse_and_project(
            self.grid, v_tilde, dt, self.fluid, self.bc, self.solver, self._forcing(t_new),
            q0=state.p * dt,
        )
        return SimState(t_new, vel, p, state.step + 1), wstar

    def stokes_state(self, pseudo_dt: float | None = None) -> SimState:
        """Steady Stokes field for the boundary data, by pseudo-time iteration
        with incremental pressure correction (advection off).

        The iteration stops once the step-to-step change is below
        ``stokes_tol`` relative to the field.
        """
        grid = self.grid
        if pseudo_dt is None:
            pseudo_dt = 8.0 * min(grid.dx, grid.dz) ** 2 / self.fluid.nu
        tol, max_iter = self.stokes_tol, self.stokes_max_iter
        v = grid.apply_bc(grid.zeros_velocity(), self.bc)
        p = np.zeros(grid.shape("scalar"))
        if self.bc.is_homogeneous and self.forcing is None:
            return SimState(0.0, v, p)
        for it in range(1, max_iter + 1):
            v_new, p = diffuse_and_project(
                grid, v, pseudo_dt, self.fluid, self.bc, self.solver, self._forcing(0.0), p_old=p
            )
            change = (v_new - v).norm()
            v = v_new
            if change <= tol * max(v.norm(), 1e-300):
                log.info("Stokes initialisation converged in %d iterations", it)
                break
        else:
            log.warning("Stokes initialisation stopped at %d iterations (change %.2e)", it, change)
        return SimState(0.0, v, p)

    def run(
        self,
        model: ModelKind,
        time_params: TimeParams,
        initial: SimState | None = None,
        output_every: int = 1,
        on_step: Callable[[SimState], None] | None = None,
    ) -> Trajectory:
        from .diagnostics import kinetic_energy, nse_residual

        grid = self.grid
        traj = Trajectory(model)
        t0 = time.perf_counter()
        state = initial if initial is not None else self.stokes_state()
        traj.wall_time["init"] = time.perf_counter() - t0

        def record(s: SimState, store: bool):
            traj.energy.append(kinetic_energy(grid, s.vel))
            div = divergence(grid, s.vel)
            traj.max_div.append(float(np.abs(div).max()))
            traj.vel_norm.append(s.vel.norm())
            traj.trace_error.append(trace_error(grid, s.vel, self.bc))
            if store:
                traj.times.append(s.t)
                traj.snapshots.append(s.vel.copy())
                traj.pressures.append(s.p.copy())
                traj.snapshot_steps.append(s.step)

        record(state, True)
        t1 = time.perf_counter()
        n = time_params.n_steps
        for k in range(1, n + 1):
            try:
                new, wstar = self.step(state, model, time_params.dt)
            except SolverError as err:
                raise SolverError(
                    f"{model.label}: solver failed at step {k}", err.residual, err.iterations
                ) from err
            traj.residual.append(
                nse_residual(grid, state, new, wstar, self.fluid, self.bc, self._forcing(new.t))
            )
            state = new
            record(state, k % output_every == 0 or k == n)
            if on_step is not None:
                on_step(state)
        traj.wall_time["steps"] = time.perf_counter() - t1
        return traj


def trace_error(grid: Grid, v: VelocityField, bc: BoundarySpec) -> float:
    """Largest deviation from the prescribed value on any non-free face."""
    err = 0.0
    for name in ("u", "w"):
        fixed = ~grid.free(name)
        if fixed.any():
            diff = v.component(name)[fixed] - bc.dirichlet(grid, name)[fixed]
            err = max(err, float(np.abs(diff).max()))
    return err
