"""Built-in cavity and bathymetry scenarios."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .deconvolution import FilterParams, ModelKind
from .grid import BoundarySpec, Grid, GridSpec, build_grid
from .solvers import SolverParams
from .timestepper import FluidParams, Simulation, TimeParams
from .wind import WindStress, build_psi


@dataclass(frozen=True)
class Bump:
    """Gaussian bump, ``height`` at ``center``, half of it at ``center +- halfwidth``."""

    height: float
    halfwidth: float
    center: float = 0.5

    def __call__(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.halfwidth
        return self.height * np.exp(-np.log(2.0) * s**2)


@dataclass(frozen=True)
class Scenario:
    name: str
    nx: int = 100
    nz: int = 50
    Lx: float = 1.0
    h: float = 0.5
    bump: Bump | None = None
    wind: WindStress = field(default_factory=WindStress)
    inflow_amplitude: float = 0.0
    inflow_side: str = "left"
    fluid: FluidParams = field(default_factory=FluidParams)
    time: TimeParams = field(default_factory=lambda: TimeParams(0.2, 90.0))
    models: tuple[ModelKind, ...] = (ModelKind.DNS(),)
    alpha: float = 0.1
    dtau: float = 1.0
    solver: SolverParams = field(default_factory=SolverParams)
    stokes_tol: float = 1e-8
    stokes_max_iter: int = 2000
    output_every: int = 5
    stations: tuple[float, ...] = (0.5,)
    n_profile: int = 51
    vtk_every: int = 0  # 0: initial and final snapshot only

    def __post_init__(self):
        if not self.models:
            raise ValueError("at least one model must be requested")
        if self.inflow_side not in ("left", "right"):
            raise ValueError("inflow_side must be 'left' or 'right'")
        if self.output_every < 1:
            raise ValueError("output every must be >= 1")
        if self.vtk_every < 0:
            raise ValueError("vtk_every must be >= 0")
        if self.n_profile < 2:
            raise ValueError("n_profile must be >= 2")
        for x0 in self.stations:
            if not 0 < x0 < self.Lx:
                raise ValueError(f"profile station {x0} outside (0, Lx)")
        FilterParams(self.alpha)
        for m in self.models:
            if m.name == "deconv" and m.dtau != self.dtau:
                raise ValueError("all deconvolution models share the scenario dtau")
        if self.bump is not None and self.bump.height >= self.h:
            raise ValueError("bump height must be below the depth h")
        self.grid_spec()  # validates the mask
        self.wind.check_support(self.Lx)

    def with_models(self, models) -> Scenario:
        return replace(self, models=tuple(models))

    def grid_spec(self) -> GridSpec:
        mask = None
        if self.bump is not None and self.bump.height > 0:
            mask = bump_mask(self.nx, self.nz, self.Lx, self.h, self.bump)
        spec = GridSpec(self.nx, self.nz, self.Lx, self.h, mask)
        build_grid(spec)
        return spec

    def build_grid(self) -> Grid:
        return build_grid(self.grid_spec())

    def boundary(self, grid: Grid) -> BoundarySpec:
        slope = self.wind(grid.x_nodes)
        if self.inflow_amplitude == 0:
            return BoundarySpec(slope=slope)
        left, right = poiseuille_profiles(grid, self.inflow_amplitude)
        if self.inflow_side == "right":
            left, right = -left, -right
        return BoundarySpec(slope=slope, u_left=left, u_right=right)

    def simulation(self, grid: Grid | None = None) -> Simulation:
        grid = grid or self.build_grid()
        return Simulation(
            grid,
            self.boundary(grid),
            build_psi(self.wind, grid),
            self.fluid,
            FilterParams(self.alpha),
            self.solver,
            stokes_tol=self.stokes_tol,
            stokes_max_iter=self.stokes_max_iter,
        )


def bump_mask(nx: int, nz: int, Lx: float, h: float, bump: Bump) -> np.ndarray:
    """Cells whose centre lies strictly below the bump curve are solid."""
    xc = (np.arange(nx) + 0.5) * Lx / nx
    zc = -h + (np.arange(nz) + 0.5) * h / nz
    top = -h + bump(xc)
    return zc[None, :] < top[:, None]


def poiseuille(z, z_bottom: float, amplitude: float):
    """Parabola over [z_bottom, 0] with peak ``amplitude`` and zero ends."""
    s = (np.asarray(z, dtype=float) - z_bottom) / (0.0 - z_bottom)
    return np.where((s >= 0) & (s <= 1), 4.0 * amplitude * s * (1.0 - s), 0.0)


def poiseuille_profiles(grid: Grid, amplitude: float) -> tuple[np.ndarray, np.ndarray]:
    """Inflow on the left, outflow on the right rescaled to the same flux."""
    z = grid.z_centers
    left = poiseuille(z, grid.bottom_height[0], amplitude)
    right = poiseuille(z, grid.bottom_height[-1], amplitude)
    left[grid.solid[0]] = 0.0
    right[grid.solid[-1]] = 0.0
    if right.sum() > 0:
        right *= left.sum() / right.sum()
    return left, right


def builtin_cavity() -> Scenario:
    return Scenario(
        name="cavity",
        nx=100,
        nz=50,
        time=TimeParams(0.2, 90.0),
        models=(ModelKind.DNS(), ModelKind.LerayAlpha(), ModelKind.Deconv(5), ModelKind.Deconv(20)),
        alpha=0.1,
        dtau=1.0,
    )


def builtin_bathymetry() -> Scenario:
    return Scenario(
        name="bathymetry",
        nx=100,
        nz=50,
        bump=Bump(height=0.4 * 0.5, halfwidth=0.15 * 1.0, center=0.5),
        inflow_amplitude=1.0,
        inflow_side="left",
        time=TimeParams(0.02, 10.0),
        models=(ModelKind.DNS(), ModelKind.LerayAlpha(), ModelKind.Deconv(5)),
        alpha=0.1,
        dtau=1.0,
        output_every=10,
    )


BUILTIN = {"cavity": builtin_cavity, "bathymetry": builtin_bathymetry}
