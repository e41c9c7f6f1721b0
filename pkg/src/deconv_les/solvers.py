"""Conjugate-gradient solves for (a I - b Lap) x = rhs and the pressure
Poisson problem, plus the Leray projection built on them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .grid import BoundarySpec, Grid, VelocityField, boundary_term, divergence, gradient

log = logging.getLogger(__name__)


@dataclass
class SolverParams:
    rel_tol: float = 1e-10
    max_iter: int | None = None  # None -> 10 * (nx + nz)

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def iteration_cap(self, grid: Grid) -> int:
        return self.max_iter if self.max_iter is not None else 10 * (grid.nx + grid.nz)


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float  # recomputed ||b - A x||
    history: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)


def conjugate_gradient(
    A,
    b: np.ndarray,
    *,
    x0: np.ndarray | None = None,
    rel_tol: float = 1e-8,
    atol: float = 0.0,
    max_iter: int = 1000,
    diag: np.ndarray | None = None,
    track_energy: bool = False,
) -> CGResult:
    """Jacobi-preconditioned CG on a symmetric positive (semi)definite ``A``.

    Stops once ``||r|| <= max(rel_tol * ||b||, atol)``.  The returned
    residual is recomputed from scratch.  ``track_energy`` records the
    quantity ``x.A x - 2 b.x``, which decreases monotonically in exact
    arithmetic (the A-norm of the error up to a constant).
    """
    # solve for x / s with s = max|b| so tiny or huge data cannot under/overflow r.z
    scale = float(np.abs(b).max()) if b.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        scale = 1.0
    b_user = b
    b = b / scale
    x = np.zeros_like(b) if x0 is None else x0 / scale
    r = b - A @ x if x0 is not None else b.copy()
    bnorm = np.linalg.norm(b)
    target = max(rel_tol * bnorm, atol / scale)
    inv_diag = None if diag is None else 1.0 / diag
    history = [float(np.linalg.norm(r))]
    energy = []
    if history[0] <= target:
        return CGResult(x * scale, 0, history[0] * scale, [history[0] * scale])
    z = r * inv_diag if inv_diag is not None else r
    d = z.copy()
    rz = r @ z
    k = 0
    converged = False
    for k in range(1, max_iter + 1):
        Ad = A @ d
        dAd = d @ Ad
        if dAd <= 0:
            break
        step = rz / dAd
        x += step * d
        r -= step * Ad
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)
        if track_energy:
            energy.append(float(x @ (A @ x) - 2 * (b @ x)))
        if rnorm <= target:
            converged = True
            break
        z = r * inv_diag if inv_diag is not None else r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    x *= scale
    true_res = float(np.linalg.norm(b_user - A @ x))
    history = [h * scale for h in history]
    energy = [e * scale**2 for e in energy]
    result = CGResult(x, k, true_res, history, energy)
    if not converged and true_res > target * scale:
        raise SolverError("conjugate gradient did not converge", true_res, k)
    return result


def helmholtz_system(grid: Grid, a: float, b: float, component: str):
    """Sparse matrix of (a I - b Lap) on the free samples, and its diagonal."""
    cache = grid.__dict__.setdefault("_helmholtz_cache", {})
    key = (component, float(a), float(b))
    if key not in cache:
        op = grid.component_operator(component)
        M = (a * sp.identity(op.L.shape[0], format="csr") - b * op.L).tocsr()
        if len(cache) > 32:
            cache.clear()
        cache[key] = (M, M.diagonal())
    return cache[key]


def solve_helmholtz(
    grid: Grid,
    a: float,
    b: float,
    rhs: np.ndarray,
    bc: BoundarySpec | None = None,
    component: str = "scalar",
    params: SolverParams | None = None,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Solve (a I - b Lap) x = rhs on the free samples of ``component``.

    Non-free samples of the result carry the Dirichlet data of ``bc``.
    """
    if not a > 0:
        raise ValueError("a must be > 0")
    if b < 0:
        raise ValueError("b must be >= 0")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("rhs is not finite")
    bc = bc or BoundarySpec()
    params = params or SolverParams()
    op = grid.component_operator(component)
    out = bc.dirichlet(grid, component) if component != "scalar" else np.zeros(op.shape)
    f = rhs.ravel()[op.index]
    if b == 0:
        out.ravel()[op.index] = f / a
        return out
    f = f + b * boundary_term(grid, bc, component)
    M, diag = helmholtz_system(grid, a, b, component)
    guess = None if x0 is None else x0.ravel()[op.index]
    res = conjugate_gradient(
        M, f, x0=guess, rel_tol=params.rel_tol, max_iter=params.iteration_cap(grid), diag=diag
    )
    out.ravel()[op.index] = res.x
    return out


def solve_pressure_poisson(
    grid: Grid,
    div: np.ndarray,
    params: SolverParams | None = None,
    atol: float | None = None,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Solve -Lap q = -div with homogeneous Neumann walls, zero-mean gauge."""
    params = params or SolverParams()
    fluid = grid.fluid
    d = div[fluid]
    mean = d.mean()
    if abs(mean) > 1e-8:
        log.info("pressure Poisson rhs has mean %.3e; removed", mean)
    d = d - mean
    M = grid.pressure_matrix
    guess = None if x0 is None else x0[fluid]
    if atol is None:
        rel, a = params.rel_tol, 0.0
    else:
        rel, a = 0.0, atol
    res = conjugate_gradient(
        M, -d, x0=guess, rel_tol=rel, atol=a, max_iter=params.iteration_cap(grid),
        diag=M.diagonal(),
    )
    q = np.zeros(grid.shape("scalar"))
    q[fluid] = res.x - res.x.mean()
    return q


def project_with_pressure(
    grid: Grid,
    v: VelocityField,
    params: SolverParams | None = None,
    q0: np.ndarray | None = None,
) -> tuple[VelocityField, np.ndarray]:
    """Leray projection v - grad q; prescribed faces are left untouched.

    The Poisson solve stops once the remaining divergence is below
    ``rel_tol * min(||div v||, ||v||)``.
    """
    params = params or SolverParams()
    if not (np.all(np.isfinite(v.u)) and np.all(np.isfinite(v.w))):
        raise ValueError("velocity is not finite")
    div = divergence(grid, v)
    dnorm = np.linalg.norm(div[grid.fluid] - div[grid.fluid].mean())
    atol = params.rel_tol * min(dnorm, v.norm())
    q = solve_pressure_poisson(grid, div, params, atol=atol, x0=q0)
    gx, gz = gradient(grid, q)
    return VelocityField(v.u - gx, v.w - gz), q


def project(grid: Grid, v: VelocityField, params: SolverParams | None = None) -> VelocityField:
    return project_with_pressure(grid, v, params)[0]
