"""Finite-difference LES of wind-driven flow in a 2D free-surface basin."""

from .deconvolution import DeconvParams, FilterParams, ModelKind, compute_transport_velocity
from .diagnostics import kinetic_energy, l2_relative_error, nse_residual, vertical_profile
from .grid import BoundarySpec, FaceKind, Grid, GridSpec, VelocityField, build_grid
from .scenarios import Scenario, builtin_bathymetry, builtin_cavity
from .solvers import SolverError, SolverParams, project, solve_helmholtz
from .timestepper import FluidParams, SimState, Simulation, TimeParams
from .wind import WindStress, build_psi

__all__ = [
    "BoundarySpec", "DeconvParams", "FaceKind", "FilterParams", "FluidParams", "Grid",
    "GridSpec", "ModelKind", "Scenario", "SimState", "Simulation", "SolverError",
    "SolverParams", "TimeParams", "VelocityField", "WindStress", "build_grid", "build_psi",
    "builtin_bathymetry", "builtin_cavity", "compute_transport_velocity", "kinetic_energy",
    "l2_relative_error", "nse_residual", "project", "solve_helmholtz", "vertical_profile",
]
