"""Surface wind stress and the divergence-free lifting field built from it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BoundarySpec, FaceKind, Grid, VelocityField


@dataclass(frozen=True)
class WindStress:
    """V(x) = A a(x) sin(pi x / Lx) with a smooth compactly supported bump a."""

    amplitude: float = 1.0
    center: float = 0.5
    halfwidth: float = 0.4
    Lx: float = 1.0

    def __post_init__(self):
        if self.halfwidth <= 0:
            raise ValueError("wind halfwidth must be > 0")

    def _s(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.halfwidth

    def bump(self, x) -> np.ndarray:
        s = self._s(x)
        inside = np.abs(s) < 1
        out = np.zeros_like(s)
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - si**2))
        return out

    def bump_derivative(self, x) -> np.ndarray:
        s = self._s(x)
        inside = np.abs(s) < 1
        out = np.zeros_like(s)
        si = s[inside]
        a = np.exp(1.0 - 1.0 / (1.0 - si**2))
        out[inside] = -a * 2 * si / (1.0 - si**2) ** 2 / self.halfwidth
        return out

    def __call__(self, x) -> np.ndarray:
        k = np.pi / self.Lx
        return self.amplitude * self.bump(x) * np.sin(k * np.asarray(x, dtype=float))

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = np.pi / self.Lx
        return self.amplitude * (
            self.bump_derivative(x) * np.sin(k * x) + self.bump(x) * k * np.cos(k * x)
        )

    def check_support(self, Lx: float) -> None:
        if self.amplitude != 0 and not (
            self.center - self.halfwidth > 0 and self.center + self.halfwidth < Lx
        ):
            raise ValueError("wind support must lie strictly inside (0, Lx)")


def _check_depth(z, h):
    z = np.asarray(z, dtype=float)
    eps = 1e-12 * h
    if np.any(z < -h - eps) or np.any(z > eps):
        raise ValueError(f"z must lie in [-h, 0] = [{-h}, 0]")
    return z


def eval_rho(z, h: float):
    z = _check_depth(z, h)
    return 3.0 / (4.0 * h) * z**2 + z + h / 4.0


def eval_kappa(z, h: float):
    """Antiderivative of rho vanishing at z = -h."""
    z = _check_depth(z, h)
    return z**3 / (4.0 * h) + z**2 / 2.0 + h * z / 4.0


@dataclass(eq=False)
class LiftField:
    psi_h: np.ndarray  # x-faces
    psi_v: np.ndarray  # z-faces
    rho: np.ndarray  # rho at the u-sample depths
    kappa: np.ndarray  # kappa at the w-sample depths

    def as_velocity(self) -> VelocityField:
        return VelocityField(self.psi_h.copy(), self.psi_v.copy())


def surface_bc(grid: Grid, wind: WindStress) -> BoundarySpec:
    return BoundarySpec(slope=wind(grid.x_nodes))


def build_psi(wind: WindStress, grid: Grid) -> LiftField:
    """Sample psi = (rho(z) V(x), -kappa(z) V'(x)) on the staggered grid.

    With bathymetry the field comes from the stream function
    V(x) kappa(z; local depth) differenced on grid nodes, so it is exactly
    discretely divergence-free and vanishes on the bump.
    """
    wind.check_support(grid.Lx)
    h = grid.h
    rho = eval_rho(grid.z_centers, h)
    kappa = eval_kappa(grid.z_nodes, h)
    if grid.has_mask:
        psi_h, psi_v = _psi_from_streamfunction(wind, grid)
    else:
        psi_h = np.outer(wind(grid.x_nodes), rho)
        psi_v = -np.outer(wind.derivative(grid.x_centers), kappa)
        psi_v[:, 0] = 0.0
        psi_v[:, -1] = 0.0
        psi_h[0] = 0.0
        psi_h[-1] = 0.0
    return LiftField(psi_h, psi_v, rho, kappa)


def _psi_from_streamfunction(wind: WindStress, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    nx = grid.nx
    # node bottom: highest fluid bottom among the adjacent columns
    cols = np.empty(nx + 1)
    b = grid.bottom_height
    cols[0], cols[-1] = b[0], b[-1]
    cols[1:-1] = np.maximum(b[:-1], b[1:])
    depth = -cols  # local depth at each node column
    X, Z = np.meshgrid(grid.x_nodes, grid.z_nodes, indexing="ij")
    D = depth[:, None]
    zc = np.maximum(Z, -D)
    phi = zc**3 / (4.0 * D) + zc**2 / 2.0 + D * zc / 4.0
    phi = phi * wind(grid.x_nodes)[:, None]
    phi[Z <= -D] = 0.0
    phi[:, -1] = 0.0
    psi_h = (phi[:, 1:] - phi[:, :-1]) / grid.dz
    psi_v = -(phi[1:] - phi[:-1]) / grid.dx
    psi_h[grid.u_kind != FaceKind.FREE] = 0.0
    psi_v[grid.w_kind != FaceKind.FREE] = 0.0
    return psi_h, psi_v
