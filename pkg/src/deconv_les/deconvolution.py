"""Helmholtz filter and the pseudo-time deconvolution producing H_tau(v).

The filter solves (I - alpha^2 Lap) x = v - psi componentwise with
homogeneous surface Neumann data and then projects.  Deconvolution marches

    (dtau I - alpha^2 Lap) delta = dtau (u_hat - phi),   phi <- phi + P delta

which for dtau = 1 is one Van Cittert update.  Component-level variants
(no projection) exist for the spectral checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import BoundarySpec, FaceKind, Grid, VelocityField
from .solvers import SolverParams, project, solve_helmholtz
from .wind import LiftField


@dataclass(frozen=True)
class FilterParams:
    alpha: float = 0.1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")


@dataclass(frozen=True)
class DeconvParams:
    tau: float = 0.0
    dtau: float = 1.0

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError("tau must be ≥ 0")
        if not self.dtau > 0:
            raise ValueError("dtau must be > 0")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.tau / self.dtau + 0.5))


@dataclass(frozen=True)
class ModelKind:
    """Closure selector: ``dns``, ``leray`` or ``deconv`` (with tau, dtau)."""

    name: str
    tau: float = 0.0
    dtau: float = 1.0

    def __post_init__(self):
        if self.name not in ("dns", "leray", "deconv"):
            raise ValueError(f"unknown model {self.name!r}")
        DeconvParams(self.tau, self.dtau)

    @classmethod
    def DNS(cls) -> ModelKind:
        return cls("dns")

    @classmethod
    def LerayAlpha(cls) -> ModelKind:
        return cls("leray")

    @classmethod
    def Deconv(cls, tau: float, dtau: float = 1.0) -> ModelKind:
        return cls("deconv", tau, dtau)

    @property
    def deconv(self) -> DeconvParams:
        return DeconvParams(self.tau if self.name == "deconv" else 0.0, self.dtau)

    @property
    def label(self) -> str:
        if self.name == "deconv":
            return f"deconv_tau{self.tau:g}" + ("" if self.dtau == 1 else f"_dtau{self.dtau:g}")
        return self.name


@dataclass(eq=False)
class DeconvState:
    phi: VelocityField
    u_hat: VelocityField


def _input_bc(grid: Grid, x: VelocityField) -> BoundarySpec:
    """Homogeneous surface data; lateral Dirichlet data carried by ``x``."""
    lateral = grid.u_kind[0] == FaceKind.LATERAL
    u_left = x.u[0].copy() if np.any(x.u[0][lateral]) else None
    u_right = x.u[-1].copy() if np.any(x.u[-1][grid.u_kind[-1] == FaceKind.LATERAL]) else None
    return BoundarySpec(u_left=u_left, u_right=u_right)


def _solve_velocity(grid, a, b, rhs: VelocityField, bc, solver) -> VelocityField:
    return VelocityField(
        solve_helmholtz(grid, a, b, rhs.u, bc, "u", solver),
        solve_helmholtz(grid, a, b, rhs.w, bc, "w", solver),
    )


def helmholtz_filter(
    grid: Grid,
    v: VelocityField,
    psi: LiftField | None,
    params: FilterParams,
    solver: SolverParams | None = None,
) -> VelocityField:
    """Homogeneous part of the filtered field, i.e. bar(v) - psi."""
    rhs = v - psi.as_velocity() if psi is not None else v.copy()
    x = _solve_velocity(grid, 1.0, params.alpha**2, rhs, _input_bc(grid, rhs), solver)
    return project(grid, x, solver)


def filtered_velocity(grid, v, psi, params, solver=None) -> VelocityField:
    """The full filtered field bar(v), satisfying the inhomogeneous BCs."""
    hat = helmholtz_filter(grid, v, psi, params, solver)
    return hat + psi.as_velocity() if psi is not None else hat


def deconv_step(
    grid: Grid,
    state: DeconvState,
    filt: FilterParams,
    dec: DeconvParams,
    solver: SolverParams | None = None,
) -> DeconvState:
    dtau = dec.dtau
    rhs = (state.u_hat - state.phi) * dtau
    delta = _solve_velocity(grid, dtau, filt.alpha**2, rhs, BoundarySpec(), solver)
    delta = project(grid, delta, solver)
    return DeconvState(state.phi + delta, state.u_hat)


def compute_transport_velocity(
    grid: Grid,
    v: VelocityField,
    model: ModelKind,
    psi: LiftField | None,
    filt: FilterParams,
    solver: SolverParams | None = None,
) -> VelocityField:
    """H_tau(v): v itself for DNS, bar(v) for Leray-alpha, deconvolved otherwise."""
    if model.name == "dns":
        return v
    dec = model.deconv
    hat = helmholtz_filter(grid, v, psi, filt, solver)
    u_hat = v - psi.as_velocity() if psi is not None else v
    state = DeconvState(hat, u_hat)
    for _ in range(dec.n_steps):
        state = deconv_step(grid, state, filt, dec, solver)
    return state.phi + psi.as_velocity() if psi is not None else state.phi


# -- single component, no projection (spectral checks) --------------------
def filter_component(
    grid: Grid, f: np.ndarray, component: str, alpha: float, solver: SolverParams | None = None
) -> np.ndarray:
    return solve_helmholtz(grid, 1.0, alpha**2, f, None, component, solver)


def deconvolve_component(
    grid: Grid,
    f: np.ndarray,
    component: str,
    alpha: float,
    tau: float,
    dtau: float = 1.0,
    solver: SolverParams | None = None,
    history: bool = False,
):
    """Deconvolve one component; with ``history`` return every iterate."""
    n = DeconvParams(tau, dtau).n_steps
    phi = filter_component(grid, f, component, alpha, solver)
    out = [phi]
    for _ in range(n):
        delta = solve_helmholtz(grid, dtau, alpha**2, dtau * (f - phi), None, component, solver)
        phi = phi + delta
        out.append(phi)
    return out if history else phi
