"""Analytic test fields shared by several test modules."""

import numpy as np
from numpy.polynomial import Polynomial

from deconv_les.grid import VelocityField


class StreamField:
    """psi = X(x) Z(z + h) with X = sin^2(pi x).

    Z, Z', Z''' vanish at the bed and Z, Z'' at the lid, so the velocity
    (Z' X, -X' Z) satisfies no-slip walls and a stress-free lid.
    """

    def __init__(self, h: float):
        self.h = h
        self.Z = Polynomial([0, 0, 1, 0, -2.25 / h**2, 1.25 / h**3])

    def X(self, x, n=0):
        k = 2 * np.pi
        if n == 0:
            return np.sin(np.pi * x) ** 2
        # derivatives of (1 - cos(k x)) / 2
        return -0.5 * k**n * np.cos(k * x + n * np.pi / 2)

    def Zd(self, z, n=0):
        return self.Z.deriv(n)(z + self.h) if n else self.Z(z + self.h)

    def u(self, x, z, dx=0, dz=0):
        return self.X(x, dx) * self.Zd(z, dz + 1)

    def w(self, x, z, dx=0, dz=0):
        return -self.X(x, dx + 1) * self.Zd(z, dz)

    def lap(self, name, x, z):
        f = self.u if name == "u" else self.w
        return f(x, z, 2, 0) + f(x, z, 0, 2)

    def discrete(self, grid) -> VelocityField:
        """Discrete curl of the node-sampled stream function (exactly solenoidal)."""
        phi = self.X(grid.x_nodes)[:, None] * self.Zd(grid.z_nodes)[None, :]
        return VelocityField(
            (phi[:, 1:] - phi[:, :-1]) / grid.dz, -(phi[1:] - phi[:-1]) / grid.dx
        )
