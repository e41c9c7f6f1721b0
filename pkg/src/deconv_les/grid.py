"""Staggered (MAC) grid for the vertical slice [0, Lx] x [-h, 0].

Array conventions, index ``[i, j]`` with ``i`` along x and ``j`` along z
(``j = 0`` is the bottom row):

* cell-centred scalars (pressure, divergence): shape ``(nx, nz)``
* horizontal velocity ``u`` on x-faces: shape ``(nx + 1, nz)``
* vertical velocity ``w`` on z-faces: shape ``(nx, nz + 1)``

Bathymetry is a stair-step mask of solid cells attached to the bottom.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

COMPONENTS = ("u", "w", "scalar")


class FaceKind(enum.IntEnum):
    INACTIVE = 0  # buried in the solid
    FREE = 1  # interior unknown
    SURFACE = 2  # Gamma_s
    LATERAL = 3  # Gamma_l
    BOTTOM = 4  # Gamma_b, including the walls of the bump


@dataclass(eq=False)
class GridSpec:
    nx: int
    nz: int
    Lx: float = 1.0
    h: float = 0.5
    mask: np.ndarray | None = None  # True marks a solid cell, shape (nx, nz)


@dataclass(eq=False)
class VelocityField:
    u: np.ndarray
    w: np.ndarray

    def copy(self) -> VelocityField:
        return VelocityField(self.u.copy(), self.w.copy())

    def __add__(self, other: VelocityField) -> VelocityField:
        return VelocityField(self.u + other.u, self.w + other.w)

    def __sub__(self, other: VelocityField) -> VelocityField:
        return VelocityField(self.u - other.u, self.w - other.w)

    def __mul__(self, c: float) -> VelocityField:
        return VelocityField(c * self.u, c * self.w)

    __rmul__ = __mul__

    def __neg__(self) -> VelocityField:
        return VelocityField(-self.u, -self.w)

    def norm(self) -> float:
        """Euclidean norm over every stored face value."""
        return float(np.sqrt(np.sum(self.u**2) + np.sum(self.w**2)))

    def dot(self, other: VelocityField) -> float:
        return float(np.sum(self.u * other.u) + np.sum(self.w * other.w))

    def max_abs(self) -> float:
        return float(max(np.abs(self.u).max(), np.abs(self.w).max()))

    def component(self, name: str) -> np.ndarray:
        return {"u": self.u, "w": self.w}[name]


@dataclass(eq=False)
class BoundarySpec:
    """Boundary data for the velocity.

    ``slope`` is the surface stress V sampled at x-faces (du/dz = V at z=0).
    ``u_left``/``u_right`` are prescribed horizontal velocities on the lateral
    faces (Poiseuille inflow/outflow); ``None`` means no-slip.  Everything
    else is a homogeneous Dirichlet wall.
    """

    slope: np.ndarray | None = None
    u_left: np.ndarray | None = None
    u_right: np.ndarray | None = None

    def surface_slope(self, grid: Grid) -> np.ndarray:
        if self.slope is None:
            return np.zeros(grid.nx + 1)
        return np.asarray(self.slope, dtype=float)

    def dirichlet(self, grid: Grid, component: str) -> np.ndarray:
        """Full array holding the prescribed value on every non-free face."""
        out = np.zeros(grid.shape(component))
        if component == "u":
            if self.u_left is not None:
                out[0] = np.where(grid.u_kind[0] == FaceKind.LATERAL, self.u_left, 0.0)
            if self.u_right is not None:
                out[-1] = np.where(grid.u_kind[-1] == FaceKind.LATERAL, self.u_right, 0.0)
        return out

    def homogeneous(self) -> BoundarySpec:
        return BoundarySpec()

    @property
    def is_homogeneous(self) -> bool:
        return all(
            a is None or not np.any(a) for a in (self.slope, self.u_left, self.u_right)
        )


def validate_mask(mask: np.ndarray, nx: int, nz: int) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (nx, nz):
        raise ValueError(f"mask shape {mask.shape} does not match grid ({nx}, {nz})")
    if mask[:, -1].any():
        raise ValueError("top row of cells must be fluid (rigid lid at z=0)")
    for i in range(nx):
        col = mask[i]
        n_solid = int(col.sum())
        if n_solid and not col[:n_solid].all():
            raise ValueError(
                f"solid cells in column {i} are not attached to the bottom as one block"
            )
    return mask


@dataclass(eq=False)
class Grid:
    spec: GridSpec
    solid: np.ndarray = field(init=False)

    def __post_init__(self):
        s = self.spec
        if s.nx < 4 or s.nz < 4:
            raise ValueError(f"grid needs nx >= 4 and nz >= 4, got ({s.nx}, {s.nz})")
        if s.Lx <= 0 or s.h <= 0:
            raise ValueError("Lx and h must be positive")
        if s.mask is None:
            self.solid = np.zeros((s.nx, s.nz), dtype=bool)
        else:
            self.solid = validate_mask(s.mask, s.nx, s.nz)

    # -- geometry ---------------------------------------------------------
    @property
    def nx(self) -> int:
        return self.spec.nx

    @property
    def nz(self) -> int:
        return self.spec.nz

    @property
    def Lx(self) -> float:
        return self.spec.Lx

    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def dx(self) -> float:
        return self.spec.Lx / self.spec.nx

    @property
    def dz(self) -> float:
        return self.spec.h / self.spec.nz

    @property
    def fluid(self) -> np.ndarray:
        return ~self.solid

    @property
    def has_mask(self) -> bool:
        return bool(self.solid.any())

    @cached_property
    def bottom_index(self) -> np.ndarray:
        """Number of solid cells in each column."""
        return self.solid.sum(axis=1)

    @cached_property
    def bottom_height(self) -> np.ndarray:
        """z of the fluid bottom in each column."""
        return -self.h + self.bottom_index * self.dz

    def shape(self, component: str) -> tuple[int, int]:
        if component == "u":
            return (self.nx + 1, self.nz)
        if component == "w":
            return (self.nx, self.nz + 1)
        if component == "scalar":
            return (self.nx, self.nz)
        raise ValueError(f"unknown component {component!r}")

    @cached_property
    def x_nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.Lx, self.nx + 1)

    @cached_property
    def z_nodes(self) -> np.ndarray:
        return np.linspace(-self.h, 0.0, self.nz + 1)

    @cached_property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @cached_property
    def z_centers(self) -> np.ndarray:
        return -self.h + (np.arange(self.nz) + 0.5) * self.dz

    def coords(self, component: str) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X, Z) of the sample locations of a component."""
        if component == "u":
            return np.meshgrid(self.x_nodes, self.z_centers, indexing="ij")
        if component == "w":
            return np.meshgrid(self.x_centers, self.z_nodes, indexing="ij")
        if component == "scalar":
            return np.meshgrid(self.x_centers, self.z_centers, indexing="ij")
        raise ValueError(f"unknown component {component!r}")

    def zeros_velocity(self) -> VelocityField:
        return VelocityField(np.zeros(self.shape("u")), np.zeros(self.shape("w")))

    def sample_velocity(self, fu, fw) -> VelocityField:
        """Sample callables ``fu(x, z)``, ``fw(x, z)`` at the face centres."""
        xu, zu = self.coords("u")
        xw, zw = self.coords("w")
        return VelocityField(
            np.broadcast_to(fu(xu, zu), xu.shape).astype(float),
            np.broadcast_to(fw(xw, zw), xw.shape).astype(float),
        )

    # -- face classification ---------------------------------------------
    @cached_property
    def u_kind(self) -> np.ndarray:
        nx, nz = self.nx, self.nz
        left = np.zeros((nx + 1, nz), dtype=bool)
        right = np.zeros((nx + 1, nz), dtype=bool)
        left[1:] = self.fluid
        right[:-1] = self.fluid
        kind = np.full((nx + 1, nz), FaceKind.INACTIVE, dtype=np.int8)
        kind[left & right] = FaceKind.FREE
        one = left ^ right
        kind[one] = FaceKind.BOTTOM
        lateral = np.zeros_like(one)
        lateral[0] = right[0]
        lateral[-1] = left[-1]
        kind[lateral] = FaceKind.LATERAL
        return kind

    @cached_property
    def w_kind(self) -> np.ndarray:
        nx, nz = self.nx, self.nz
        below = np.zeros((nx, nz + 1), dtype=bool)
        above = np.zeros((nx, nz + 1), dtype=bool)
        below[:, 1:] = self.fluid
        above[:, :-1] = self.fluid
        kind = np.full((nx, nz + 1), FaceKind.INACTIVE, dtype=np.int8)
        kind[below & above] = FaceKind.FREE
        kind[below ^ above] = FaceKind.BOTTOM
        kind[:, -1] = FaceKind.SURFACE
        return kind

    def kind(self, component: str) -> np.ndarray:
        if component == "u":
            return self.u_kind
        if component == "w":
            return self.w_kind
        if component == "scalar":
            return np.where(self.fluid, FaceKind.FREE, FaceKind.INACTIVE).astype(np.int8)
        raise ValueError(f"unknown component {component!r}")

    def free(self, component: str) -> np.ndarray:
        return self.kind(component) == FaceKind.FREE

    def boundary_faces(self, component: str) -> np.ndarray:
        k = self.kind(component)
        return (k != FaceKind.FREE) & (k != FaceKind.INACTIVE)

    def apply_bc(self, v: VelocityField, bc: BoundarySpec | None = None) -> VelocityField:
        """Overwrite every non-free face with its prescribed value."""
        bc = bc or BoundarySpec()
        out = v.copy()
        for name in ("u", "w"):
            arr = out.component(name)
            fixed = ~self.free(name)
            arr[fixed] = bc.dirichlet(self, name)[fixed]
        return out

    # -- sparse operators (assembled once per grid) ----------------------
    @cached_property
    def _div_free(self) -> sp.csr_matrix:
        """Divergence restricted to free faces: fluid cells x (free u, free w)."""
        nx, nz = self.nx, self.nz
        cell_id = -np.ones((nx, nz), dtype=np.int64)
        cell_id[self.fluid] = np.arange(int(self.fluid.sum()))
        rows, cols, vals = [], [], []
        iu, ju = np.nonzero(self.free("u"))
        col_u = np.arange(len(iu))
        # u face i feeds cell i-1 with +1/dx and cell i with -1/dx
        rows += [cell_id[iu - 1, ju], cell_id[iu, ju]]
        cols += [col_u, col_u]
        vals += [np.full(len(iu), 1 / self.dx), np.full(len(iu), -1 / self.dx)]
        iw, jw = np.nonzero(self.free("w"))
        col_w = len(iu) + np.arange(len(iw))
        rows += [cell_id[iw, jw - 1], cell_id[iw, jw]]
        cols += [col_w, col_w]
        vals += [np.full(len(iw), 1 / self.dz), np.full(len(iw), -1 / self.dz)]
        D = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(int(self.fluid.sum()), len(iu) + len(iw)),
        )
        return D.tocsr()

    @cached_property
    def pressure_matrix(self) -> sp.csr_matrix:
        """-div(grad .) on fluid cells with homogeneous Neumann walls (PSD)."""
        D = self._div_free
        return (D @ D.T).tocsr()

    def component_operator(self, component: str) -> ComponentOperator:
        cache = self.__dict__.setdefault("_component_ops", {})
        if component not in cache:
            cache[component] = _assemble_component(self, component)
        return cache[component]


@dataclass(eq=False)
class ComponentOperator:
    """Affine 5-point Laplacian on the free samples of one component.

    ``lap[free] = L @ f[free] + B @ g.ravel() + N @ slope`` where ``g`` holds
    the Dirichlet data and ``slope`` the surface Neumann data.
    """

    component: str
    shape: tuple[int, int]
    free: np.ndarray
    index: np.ndarray  # flat indices of the free samples
    L: sp.csr_matrix
    B: sp.csr_matrix
    N: sp.csr_matrix | None

    @cached_property
    def diagonal(self) -> np.ndarray:
        return self.L.diagonal()


def _assemble_component(grid: Grid, component: str) -> ComponentOperator:
    shape = grid.shape(component)
    kind = grid.kind(component)
    free = kind == FaceKind.FREE
    n0, n1 = shape
    unknown = -np.ones(shape, dtype=np.int64)
    unknown[free] = np.arange(int(free.sum()))
    inv = {0: 1.0 / grid.dx**2, 1: 1.0 / grid.dz**2}

    L_r, L_c, L_v = [], [], []
    B_r, B_c, B_v = [], [], []
    N_r, N_c, N_v = [], [], []
    for i, j in zip(*np.nonzero(free)):
        p = unknown[i, j]
        diag = 0.0
        for di, dj, axis in ((-1, 0, 0), (1, 0, 0), (0, -1, 1), (0, 1, 1)):
            c = inv[axis]
            qi, qj = i + di, j + dj
            inside = 0 <= qi < n0 and 0 <= qj < n1
            if component == "u" and dj == 1 and qj == n1:
                # surface: ghost = f + dz * V, contributes V / dz
                N_r.append(p)
                N_c.append(i)
                N_v.append(1.0 / grid.dz)
                continue
            if inside and kind[qi, qj] == FaceKind.FREE:
                L_r.append(p)
                L_c.append(unknown[qi, qj])
                L_v.append(c)
                diag -= c
            elif inside and kind[qi, qj] != FaceKind.INACTIVE and component != "scalar":
                # neighbour sits on the wall: use its prescribed value
                B_r.append(p)
                B_c.append(qi * n1 + qj)
                B_v.append(c)
                diag -= c
            else:
                # wall halfway to the neighbour: odd reflection of a zero trace
                diag -= 2 * c
        L_r.append(p)
        L_c.append(p)
        L_v.append(diag)

    n_free = int(free.sum())
    L = sp.coo_matrix((L_v, (L_r, L_c)), shape=(n_free, n_free)).tocsr()
    B = sp.coo_matrix((B_v, (B_r, B_c)), shape=(n_free, n0 * n1)).tocsr()
    N = None
    if component == "u":
        N = sp.coo_matrix((N_v, (N_r, N_c)), shape=(n_free, grid.nx + 1)).tocsr()
    index = np.flatnonzero(free.ravel())
    return ComponentOperator(component, shape, free, index, L, B, N)


def build_grid(spec: GridSpec) -> Grid:
    return Grid(spec)


# -- discrete differential operators --------------------------------------
def divergence(grid: Grid, v: VelocityField) -> np.ndarray:
    """Cell-centred MAC divergence; zero in solid cells."""
    if v.u.shape != grid.shape("u") or v.w.shape != grid.shape("w"):
        raise ValueError("velocity field does not match the grid")
    div = (v.u[1:] - v.u[:-1]) / grid.dx + (v.w[:, 1:] - v.w[:, :-1]) / grid.dz
    div[grid.solid] = 0.0
    return div


def gradient(grid: Grid, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centred differences of a cell-centred field onto the free faces."""
    if p.shape != grid.shape("scalar"):
        raise ValueError("pressure field does not match the grid")
    gx = np.zeros(grid.shape("u"))
    gz = np.zeros(grid.shape("w"))
    gx[1:-1] = (p[1:] - p[:-1]) / grid.dx
    gz[:, 1:-1] = (p[:, 1:] - p[:, :-1]) / grid.dz
    gx[~grid.free("u")] = 0.0
    gz[~grid.free("w")] = 0.0
    return gx, gz


def pressure_laplacian(grid: Grid, p: np.ndarray) -> np.ndarray:
    """div(grad p): the Neumann 5-point Laplacian on fluid cells."""
    gx, gz = gradient(grid, p)
    return divergence(grid, VelocityField(gx, gz))


def laplacian(
    grid: Grid, f: np.ndarray, bc: BoundarySpec | None = None, component: str = "scalar"
) -> np.ndarray:
    """5-point Laplacian with ghost values realising the boundary conditions.

    ``u``: surface Neumann (slope from ``bc``), Dirichlet elsewhere.
    ``w``: Dirichlet everywhere.  ``scalar``: homogeneous Dirichlet box on
    cell centres.  Values on non-free samples are returned as zero.
    """
    if component not in COMPONENTS:
        raise ValueError(f"unknown component {component!r}")
    bc = bc or BoundarySpec()
    op = grid.component_operator(component)
    if f.shape != op.shape:
        raise ValueError(f"field shape {f.shape} does not match {component} samples {op.shape}")
    out = np.zeros(op.shape)
    out.ravel()[op.index] = op.L @ f.ravel()[op.index] + boundary_term(grid, bc, component)
    return out


def boundary_term(grid: Grid, bc: BoundarySpec, component: str) -> np.ndarray:
    """Inhomogeneous part of the Laplacian on the free samples."""
    op = grid.component_operator(component)
    if component == "scalar":
        return np.zeros(len(op.index))
    g = bc.dirichlet(grid, component)
    out = op.B @ g.ravel()
    if op.N is not None:
        out = out + op.N @ bc.surface_slope(grid)
    return out


# -- interpolation ---------------------------------------------------------
def padded_components(
    grid: Grid, v: VelocityField, bc: BoundarySpec | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Components extended by one ghost layer in their wall-normal direction.

    ``u`` gets ghost rows below the bottom (odd reflection) and above the
    surface (Neumann slope); ``w`` gets ghost columns beyond the lateral
    walls (odd reflection).
    """
    bc = bc or BoundarySpec()
    u = np.empty((grid.nx + 1, grid.nz + 2))
    u[:, 1:-1] = v.u
    u[:, 0] = -v.u[:, 0]
    u[:, -1] = v.u[:, -1] + grid.dz * bc.surface_slope(grid)
    w = np.empty((grid.nx + 2, grid.nz + 1))
    w[1:-1] = v.w
    w[0] = -v.w[0]
    w[-1] = -v.w[-1]
    return u, w


def clamp_to_fluid(grid: Grid, x: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.clip(x, 0.0, grid.Lx)
    z = np.clip(z, -grid.h, 0.0)
    if grid.has_mask:
        col = np.clip((x / grid.dx).astype(np.int64), 0, grid.nx - 1)
        z = np.maximum(z, grid.bottom_height[col])
    return x, z


def _bilinear(arr: np.ndarray, x0: float, z0: float, dx: float, dz: float, x, z):
    fx = (x - x0) / dx
    fz = (z - z0) / dz
    i = np.clip(np.floor(fx).astype(np.int64), 0, arr.shape[0] - 2)
    j = np.clip(np.floor(fz).astype(np.int64), 0, arr.shape[1] - 2)
    tx = np.clip(fx - i, 0.0, 1.0)
    tz = np.clip(fz - j, 0.0, 1.0)
    return (
        arr[i, j] * (1 - tx) * (1 - tz)
        + arr[i + 1, j] * tx * (1 - tz)
        + arr[i, j + 1] * (1 - tx) * tz
        + arr[i + 1, j + 1] * tx * tz
    )


def interpolate_velocity(
    grid: Grid,
    v: VelocityField,
    x,
    z,
    bc: BoundarySpec | None = None,
    padded: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear interpolation of both staggered components at points (x, z).

    Points are first clamped to the fluid domain.
    """
    x, z = clamp_to_fluid(grid, np.asarray(x, dtype=float), np.asarray(z, dtype=float))
    u_pad, w_pad = padded if padded is not None else padded_components(grid, v, bc)
    dx, dz = grid.dx, grid.dz
    u = _bilinear(u_pad, 0.0, -grid.h - 0.5 * dz, dx, dz, x, z)
    w = _bilinear(w_pad, -0.5 * dx, -grid.h, dx, dz, x, z)
    return u, w


def interpolate_component(
    grid: Grid, padded_arr: np.ndarray, component: str, x, z
) -> np.ndarray:
    dx, dz = grid.dx, grid.dz
    if component == "u":
        return _bilinear(padded_arr, 0.0, -grid.h - 0.5 * dz, dx, dz, x, z)
    return _bilinear(padded_arr, -0.5 * dx, -grid.h, dx, dz, x, z)
