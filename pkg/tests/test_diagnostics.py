import numpy as np
import pytest
from fields import StreamField
from hypothesis import given, strategies as st

from deconv_les.diagnostics import (
    kinetic_energy,
    l2_relative_error,
    nse_residual,
    vertical_profile,
)
from deconv_les.grid import BoundarySpec, GridSpec, VelocityField, build_grid
from deconv_les.timestepper import FluidParams, SimState
from deconv_les.wind import WindStress, build_psi, eval_rho, surface_bc


@pytest.fixture(scope="module")
def grid():
    return build_grid(GridSpec(32, 16, 1.0, 0.5))


def test_profile_of_zero_state(grid):
    prof = vertical_profile(grid, grid.zeros_velocity(), 0.5, 21)
    assert np.all(prof.values == 0.0)
    assert prof.z[0] == 0.0 and prof.z[-1] == -0.5
    assert np.all(np.diff(prof.z) < 0)


def test_profile_of_lift_is_rho_times_wind(grid):
    w = WindStress()
    psi = build_psi(w, grid)
    prof = vertical_profile(grid, psi.as_velocity(), 0.5, 51, surface_bc(grid, w))
    expected = eval_rho(prof.z, grid.h) * w(0.5)
    assert prof.values[0] == pytest.approx(0.125 * float(w(0.5)), abs=grid.dz**2)
    np.testing.assert_allclose(prof.values, expected, atol=grid.dz**2)


def test_profile_linear_in_z_exact(grid):
    v = grid.sample_velocity(lambda x, z: 0.2 - 1.5 * z, lambda x, z: 0 * x)
    prof = vertical_profile(grid, v, 0.37, 41, BoundarySpec(slope=np.full(grid.nx + 1, -1.5)))
    inner = prof.z > -grid.h + grid.dz / 2
    np.testing.assert_allclose(prof.values[inner], (0.2 - 1.5 * prof.z)[inner], atol=1e-13)


@pytest.mark.parametrize("x0", [0.0, 1.0, -0.1, 1.5])
def test_profile_station_outside_rejected(grid, x0):
    with pytest.raises(ValueError, match="outside"):
        vertical_profile(grid, grid.zeros_velocity(), x0)


def test_kinetic_energy_examples():
    g = build_grid(GridSpec(8, 8, 1.0, 1.0))
    assert kinetic_energy(g, g.zeros_velocity()) == 0.0
    v = VelocityField(np.ones(g.shape("u")), np.zeros(g.shape("w")))
    assert kinetic_energy(g, v) == pytest.approx(0.5)


def test_relative_error_examples(grid, rng):
    b = VelocityField(rng.standard_normal(grid.shape("u")), rng.standard_normal(grid.shape("w")))
    assert l2_relative_error(grid, b, b) == 0.0
    assert l2_relative_error(grid, b * 1.01, b) == pytest.approx(1.0)
    assert l2_relative_error(grid, [b * 1.01, b * 0.97], [b, b]) == pytest.approx(2.0)


def test_relative_error_shape_checks(grid):
    a = grid.zeros_velocity()
    with pytest.raises(ValueError):
        l2_relative_error(grid, [a, a], [a])
    with pytest.raises(ValueError):
        l2_relative_error(grid, VelocityField(np.zeros((3, 3)), np.zeros((3, 3))), a)


@given(seed=st.integers(0, 2**31))
def test_relative_error_numerator_is_a_metric(seed):
    g = build_grid(GridSpec(8, 4, 1.0, 0.5))
    rng = np.random.default_rng(seed)
    a, b, c, ref = (
        VelocityField(rng.standard_normal(g.shape("u")), rng.standard_normal(g.shape("w")))
        for _ in range(4)
    )

    def d(x, y):
        # ||x - y|| scaled by the fixed ||ref||
        return l2_relative_error(g, x - y + ref, ref)

    assert d(a, b) == pytest.approx(d(b, a))
    assert d(a, a) == 0.0
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


def test_residual_zero_for_quiescent_state(grid):
    s = SimState(0.0, grid.zeros_velocity(), np.zeros(grid.shape("scalar")))
    s1 = SimState(0.2, grid.zeros_velocity(), np.zeros(grid.shape("scalar")))
    assert nse_residual(grid, s, s1, s1.vel, FluidParams(), BoundarySpec()) == 0.0


def test_residual_of_manufactured_steady_flow_converges():
    nu = 0.05
    res = []
    for n in (32, 64, 128):
        g = build_grid(GridSpec(n, n // 2, 1.0, 0.5))
        sf = StreamField(g.h)
        v = sf.discrete(g)
        f = {}
        for name in ("u", "w"):
            x, z = g.coords(name)
            comp = sf.u if name == "u" else sf.w
            adv = sf.u(x, z) * comp(x, z, 1, 0) + sf.w(x, z) * comp(x, z, 0, 1)
            f[name] = adv - nu * sf.lap(name, x, z)
        p = np.zeros(g.shape("scalar"))
        res.append(nse_residual(g, SimState(0.0, v, p), SimState(0.1, v, p), v, FluidParams(nu),
                                BoundarySpec(), VelocityField(f["u"], f["w"])))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    # interior O(dx^2); the stress-free lid row contributes O(dz^1.5) in L2
    assert np.all(orders > 1.4)
    assert res[-1] < 1e-3


def test_residual_nonnegative_finite(grid, rng):
    v0 = VelocityField(rng.standard_normal(grid.shape("u")), rng.standard_normal(grid.shape("w")))
    v1 = v0 * 0.5
    p = rng.standard_normal(grid.shape("scalar"))
    r = nse_residual(grid, SimState(0.0, v0, p), SimState(0.1, v1, p), v1, FluidParams(),
                     BoundarySpec())
    assert np.isfinite(r) and r > 0
