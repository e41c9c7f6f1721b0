"""Profiles, inter-model errors, momentum residual and kinetic energy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import BoundarySpec, Grid, VelocityField, gradient, interpolate_velocity, laplacian
from .grid import padded_components


@dataclass
class ProfileSample:
    x0: float
    z: np.ndarray  # strictly decreasing from 0 to -h
    values: np.ndarray


def vertical_profile(
    grid: Grid,
    v: VelocityField,
    x0: float = 0.5,
    n_samples: int = 51,
    bc: BoundarySpec | None = None,
) -> ProfileSample:
    """Horizontal velocity along the vertical line x = x0."""
    if not 0 < x0 < grid.Lx:
        raise ValueError(f"station x0={x0} outside (0, {grid.Lx})")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    z = np.linspace(0.0, -grid.h, n_samples)
    u, _ = interpolate_velocity(grid, v, np.full_like(z, x0), z, bc)
    return ProfileSample(x0, z, u)


def _cell_energy_density(grid: Grid, v: VelocityField) -> np.ndarray:
    uu = 0.5 * (v.u[1:] ** 2 + v.u[:-1] ** 2)
    ww = 0.5 * (v.w[:, 1:] ** 2 + v.w[:, :-1] ** 2)
    e = uu + ww
    e[grid.solid] = 0.0
    return e


def l2_norm(grid: Grid, v: VelocityField) -> float:
    return float(np.sqrt(np.sum(_cell_energy_density(grid, v)) * grid.dx * grid.dz))


def kinetic_energy(grid: Grid, v: VelocityField) -> float:
    """1/2 sum over fluid cells of the cell-averaged |v|^2 times the cell area."""
    return 0.5 * l2_norm(grid, v) ** 2


def l2_relative_error(
    grid: Grid,
    a: VelocityField | Sequence[VelocityField],
    b: VelocityField | Sequence[VelocityField],
) -> float:
    """100 ||a - b|| / ||b||, averaged over snapshots when given sequences."""
    if isinstance(a, VelocityField):
        a = [a]
    if isinstance(b, VelocityField):
        b = [b]
    if len(a) != len(b):
        raise ValueError(f"snapshot counts differ: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("no snapshots to compare")
    errs = []
    for x, y in zip(a, b):
        if x.u.shape != y.u.shape or x.w.shape != y.w.shape:
            raise ValueError("field shapes differ")
        ny = l2_norm(grid, y)
        if ny == 0:
            raise ValueError("reference field has zero norm")
        errs.append(100.0 * l2_norm(grid, x - y) / ny)
    return float(np.mean(errs))


def advection_term(
    grid: Grid, wstar: VelocityField, v: VelocityField, bc: BoundarySpec | None = None
) -> VelocityField:
    """(wstar . grad) v on the faces by centred differences."""
    u_pad, w_pad = padded_components(grid, v, bc)
    dx, dz = grid.dx, grid.dz
    out = grid.zeros_velocity()

    # u faces: x-neighbours are stored, z-neighbours come from the padded rows
    dudx = np.zeros(grid.shape("u"))
    dudx[1:-1] = (v.u[2:] - v.u[:-2]) / (2 * dx)
    dudz = (u_pad[:, 2:] - u_pad[:, :-2]) / (2 * dz)
    w_at_u = np.zeros(grid.shape("u"))
    wc = 0.5 * (wstar.w[:, 1:] + wstar.w[:, :-1])  # w at cell centres
    w_at_u[1:-1] = 0.5 * (wc[1:] + wc[:-1])
    out.u[:] = wstar.u * dudx + w_at_u * dudz

    dwdx = (w_pad[2:] - w_pad[:-2]) / (2 * dx)
    dwdz = np.zeros(grid.shape("w"))
    dwdz[:, 1:-1] = (v.w[:, 2:] - v.w[:, :-2]) / (2 * dz)
    u_at_w = np.zeros(grid.shape("w"))
    uc = 0.5 * (wstar.u[1:] + wstar.u[:-1])  # u at cell centres
    u_at_w[:, 1:-1] = 0.5 * (uc[:, 1:] + uc[:, :-1])
    out.w[:] = u_at_w * dwdx + wstar.w * dwdz

    out.u[~grid.free("u")] = 0.0
    out.w[~grid.free("w")] = 0.0
    return out


def momentum_defect(
    grid: Grid,
    v_old: VelocityField,
    v_new: VelocityField,
    p_new: np.ndarray,
    wstar: VelocityField,
    dt: float,
    nu: float,
    bc: BoundarySpec,
    forcing: VelocityField | None = None,
) -> VelocityField:
    adv = advection_term(grid, wstar, v_new, bc)
    gx, gz = gradient(grid, p_new)
    r = (v_new - v_old) * (1.0 / dt) + adv
    r = r - VelocityField(
        nu * laplacian(grid, v_new.u, bc, "u"), nu * laplacian(grid, v_new.w, bc, "w")
    )
    r = r + VelocityField(gx, gz)
    if forcing is not None:
        r = r - forcing
    r.u[~grid.free("u")] = 0.0
    r.w[~grid.free("w")] = 0.0
    return r


def nse_residual(grid, state_n, state_np1, wstar, fluid, bc, forcing=None) -> float:
    """Discrete L2 norm of the momentum-equation defect between two states."""
    dt = state_np1.t - state_n.t
    r = momentum_defect(
        grid, state_n.vel, state_np1.vel, state_np1.p, wstar, dt, fluid.nu, bc, forcing
    )
    return float(np.sqrt((np.sum(r.u**2) + np.sum(r.w**2)) * grid.dx * grid.dz))
