"""Closed-form filter/deconvolution coefficients on separable eigenmodes.

Sine modes are exact eigenvectors of the 5-point stencil, so a gridded
solve applied to one must return the closed-form coefficient computed with
the discrete eigenvalue, up to solver tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridSpec, build_grid
from .deconvolution import deconvolve_component, filter_component
from .solvers import SolverParams


@dataclass
class EigenMode:
    k: int
    lam: float
    shape: np.ndarray


def dirichlet_eigenvalue(k: int, L: float, n: int | None = None) -> float:
    """(k pi / L)^2, or the 5-point value (2/d^2)(1 - cos(k pi d / L)) with d = L/n."""
    if k < 1:
        raise ValueError("mode index must be >= 1")
    if n is None:
        return (k * math.pi / L) ** 2
    d = L / n
    return 2.0 / d**2 * (1.0 - math.cos(k * math.pi * d / L))


def mixed_eigenvalue(k: int, h: float, n: int | None = None) -> float:
    """Neumann at the surface, Dirichlet at the bottom: mu = (k - 1/2) pi / h."""
    if k < 1:
        raise ValueError("mode index must be >= 1")
    mu = (k - 0.5) * math.pi / h
    if n is None:
        return mu**2
    d = h / n
    return 2.0 / d**2 * (1.0 - math.cos(mu * d))


def dirichlet_mode(k: int, n: int, L: float, staggering: str = "node") -> EigenMode:
    """sin(k pi x / L) on nodes (x = i d, i = 0..n) or centres (x = (i + 1/2) d)."""
    d = L / n
    x = np.arange(n + 1) * d if staggering == "node" else (np.arange(n) + 0.5) * d
    return EigenMode(k, dirichlet_eigenvalue(k, L, n), np.sin(k * math.pi * x / L))


def mixed_mode(k: int, n: int, h: float) -> EigenMode:
    """Depth profile on cell centres, zero at z=-h and flat at z=0."""
    d = h / n
    s = (np.arange(n) + 0.5) * d
    mu = (k - 0.5) * math.pi / h
    return EigenMode(k, mixed_eigenvalue(k, h, n), np.sin(mu * s))


def exact_filter_coeff(lam: float, alpha: float) -> float:
    return 1.0 / (1.0 + alpha**2 * lam)


def filtered_coeff(u_k: float, psi_k: float, lam: float, alpha: float) -> float:
    """Filtered coefficient (u_k + alpha^2 psi_k) / (1 + alpha^2 lam)."""
    return (u_k + alpha**2 * psi_k) / (1.0 + alpha**2 * lam)


def exact_deconv_coeff(
    lam: float, tau: float, alpha: float, psi_k: float = 0.0, u_k: float = 1.0
) -> float:
    """u_k + (ubar_k - u_k) exp(-tau / (alpha^2 lam))."""
    if tau < 0:
        raise ValueError("tau must be ≥ 0")
    ubar = filtered_coeff(u_k, psi_k, lam, alpha)
    return u_k + (ubar - u_k) * math.exp(-tau / (alpha**2 * lam))


def van_cittert_coeff(g: float, n_steps: int) -> float:
    """Coefficient after N Van Cittert updates starting from the filter value g."""
    return 1.0 - (1.0 - g) ** (n_steps + 1)


def stepped_deconv_coeff(lam: float, alpha: float, tau: float, dtau: float) -> float:
    """Coefficient after round(tau/dtau) implicit pseudo-time steps."""
    n = int(math.floor(tau / dtau + 0.5))
    g = exact_filter_coeff(lam, alpha)
    a2l = alpha**2 * lam
    return 1.0 - (1.0 - g) * (a2l / (dtau + a2l)) ** n


@dataclass
class ModeReport:
    k: int
    expected: float
    measured: float

    @property
    def rel_dev(self) -> float:
        return abs(self.measured - self.expected) / max(abs(self.expected), 1e-300)


@dataclass
class OracleReport:
    modes: list[ModeReport] = field(default_factory=list)
    off_mode_energy: float = 0.0
    tolerance: float = 0.0

    @property
    def max_rel_dev(self) -> float:
        return max((m.rel_dev for m in self.modes), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_dev <= self.tolerance


def mode_coefficient(field_values: np.ndarray, shape: np.ndarray) -> float:
    denom = float(np.sum(shape * shape))
    return float(np.sum(field_values * shape)) / denom


def oracle_compare(
    results: dict[int, np.ndarray],
    shapes: dict[int, np.ndarray],
    expected: dict[int, float],
    tolerance: float,
    nyquist: int | None = None,
) -> OracleReport:
    """Project each gridded result on its input mode and compare with ``expected``.

    ``results[k]`` is the solver output for input ``shapes[k]``.
    """
    if nyquist is not None and any(k > nyquist for k in results):
        raise ValueError(f"mode index exceeds Nyquist limit {nyquist}")
    report = OracleReport(tolerance=tolerance)
    off = 0.0
    for k, res in results.items():
        e = shapes[k]
        c = mode_coefficient(res, e)
        report.modes.append(ModeReport(k, expected[k], c))
        rest = res - c * e
        off = max(off, float(np.sum(rest**2)) / max(float(np.sum(res**2)), 1e-300))
    report.off_mode_energy = off
    return report


# -- gridded runs on the horizontal-velocity component ---------------------
def u_mode(grid: Grid, kx: int, kz: int = 1) -> EigenMode:
    """sin(kx pi x / Lx) times the mixed depth profile, on x-faces."""
    mx = dirichlet_mode(kx, grid.nx, grid.Lx, "node")
    mz = mixed_mode(kz, grid.nz, grid.h)
    return EigenMode(kx, mx.lam + mz.lam, np.outer(mx.shape, mz.shape))


def w_mode(grid: Grid, kx: int, kz: int = 1) -> EigenMode:
    """Dirichlet sine modes in both directions, on z-faces."""
    mx = dirichlet_mode(kx, grid.nx, grid.Lx, "centre")
    mz = dirichlet_mode(kz, grid.nz, grid.h, "node")
    return EigenMode(kx, mx.lam + mz.lam, np.outer(mx.shape, mz.shape))


def oracle_grid(nx: int = 64, nz: int = 32, Lx: float = 1.0, h: float = 0.5) -> Grid:
    return build_grid(GridSpec(nx, nz, Lx, h))


def filter_oracle(
    grid: Grid, alpha: float, modes, tolerance: float = 1e-8, solver: SolverParams | None = None
) -> OracleReport:
    """Filter each x-mode on both velocity components (w: pure Dirichlet sines)."""
    solver = solver or SolverParams(rel_tol=1e-13)
    report = OracleReport(tolerance=tolerance)
    for comp, make in (("u", u_mode), ("w", w_mode)):
        results, shapes, expected = {}, {}, {}
        for k in modes:
            m = make(grid, k)
            shapes[k] = m.shape
            results[k] = filter_component(grid, m.shape, comp, alpha, solver)
            expected[k] = exact_filter_coeff(m.lam, alpha)
        part = oracle_compare(results, shapes, expected, tolerance, nyquist=grid.nx // 2)
        report.modes += part.modes
        report.off_mode_energy = max(report.off_mode_energy, part.off_mode_energy)
    return report


def deconv_oracle_history(
    grid: Grid, alpha: float, k: int, tau: float, dtau: float, solver: SolverParams | None = None
) -> tuple[EigenMode, list[float]]:
    """Mode coefficients of every deconvolution iterate for input mode k."""
    solver = solver or SolverParams(rel_tol=1e-13)
    m = u_mode(grid, k)
    iterates = deconvolve_component(grid, m.shape, "u", alpha, tau, dtau, solver, history=True)
    return m, [mode_coefficient(x, m.shape) for x in iterates]


def oracle_table(alpha: float, tau: float, n_modes: int, L: float = 1.0, n: int | None = None):
    """Rows of (k, lambda, filter, deconv(tau), van Cittert(round tau)) for the CLI."""
    rows = []
    for k in range(1, n_modes + 1):
        lam = dirichlet_eigenvalue(k, L, n)
        g = exact_filter_coeff(lam, alpha)
        rows.append(
            {
                "k": k,
                "lambda": lam,
                "filter": g,
                "deconv": exact_deconv_coeff(lam, tau, alpha),
                "van_cittert": van_cittert_coeff(g, int(math.floor(tau + 0.5))),
                "decay": math.exp(-tau / (alpha**2 * lam)),
            }
        )
    return rows
