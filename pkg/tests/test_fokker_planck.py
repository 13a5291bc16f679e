import numpy as np
import pytest

from hjlab.errors import NonConvergence
from hjlab.fokker_planck import (
    drift_from_hamiltonian,
    fp_iterate,
    fp_residual,
    fp_weak_residual,
    solve_fp,
    stable_step,
)
from hjlab.hj import HamiltonianSpec
from hjlab.torus import Field2D, gradient, integral

from .conftest import PI, bandlimited, field


def gibbs(u):
    w = np.exp(-2 * u.values)
    return w / (np.mean(w) * u.period**2)


def test_zero_drift_gives_uniform_density():
    z = Field2D.zeros(32)
    sol = solve_fp((z, z))
    assert np.max(np.abs(sol.m.values - 1.0)) <= 1e-12
    assert sol.min_m > 0 and sol.mass_error <= 1e-12


def test_zero_drift_on_larger_torus():
    z = Field2D.zeros(16, period=2.0)
    sol = solve_fp((z, z))
    np.testing.assert_allclose(sol.m.values, 0.25, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_gradient_drift_matches_gibbs(seed):
    u = bandlimited(128, seed, kmax=6, scale=1.0)
    gx, gy = gradient(u)
    sol = solve_fp((gx * 2.0, gy * 2.0), tol=1e-10)
    assert np.max(np.abs(sol.m.values - gibbs(u))) <= 1e-8
    assert sol.mass_error <= 1e-12


def test_divergence_free_drift():
    psi = field(lambda x, y: np.sin(2 * PI * x) * np.sin(2 * PI * y))
    px, py = gradient(psi)
    sol = solve_fp((-py, px))
    assert np.max(np.abs(sol.m.values - 1.0)) <= 1e-8


def test_divergence_free_drift_from_other_start():
    psi = field(lambda x, y: np.sin(2 * PI * x) * np.sin(2 * PI * y))
    px, py = gradient(psi)
    m0 = field(lambda x, y: 1 + 0.5 * np.cos(2 * PI * y))
    sol = solve_fp((-py, px), m0=m0)
    assert np.max(np.abs(sol.m.values - 1.0)) <= 1e-8


def test_mass_drift_without_renormalization():
    u = bandlimited(64, 4, scale=1.0)
    gx, gy = gradient(u)
    m0 = field(lambda x, y: 1 + 0.3 * np.cos(2 * PI * x) * np.sin(4 * PI * y))
    m = fp_iterate(m0, (gx * 2.0, gy * 2.0), steps=1000, renormalize=False)
    assert abs(integral(m) - 1.0) <= 1e-13


def test_weak_residual_small_at_solution():
    u = bandlimited(64, 8, scale=0.8)
    gx, gy = gradient(u)
    b = (gx * 2.0, gy * 2.0)
    sol = solve_fp(b, tol=1e-10)
    for seed in range(3):
        phi = bandlimited(64, 100 + seed)
        fx, fy = gradient(phi)
        w12 = np.sqrt(integral(phi * phi) + integral(fx * fx + fy * fy))
        assert fp_weak_residual(sol.m, b, phi) <= 1e-10 * w12
    assert np.sqrt(integral(fp_residual(sol.m, b) ** 2)) <= 1e-10


def test_stable_step():
    z = Field2D.zeros(8)
    assert stable_step((z, z)) == 1.0
    b = (Field2D.constant(3.0, 8), Field2D.constant(4.0, 8))
    assert stable_step(b) == pytest.approx(1 / 51)


def test_drift_zero_gradient():
    z = Field2D.zeros(16)
    for gamma in (1.5, 2.0, 3.0):
        ax, ay = drift_from_hamiltonian(HamiltonianSpec(gamma=gamma), (z, z))
        assert ax.max_abs() == 0 and ay.max_abs() == 0


def test_drift_quadratic():
    u = bandlimited(16, 2)
    gx, gy = gradient(u)
    ax, ay = drift_from_hamiltonian(HamiltonianSpec(), (gx, gy))
    assert np.array_equal(ax.values, 2 * gx.values) and np.array_equal(ay.values, 2 * gy.values)


@pytest.mark.parametrize("c", [-1.5, 0.7])
def test_drift_cubic(c):
    g = (Field2D.constant(c, 8), Field2D.zeros(8))
    ax, ay = drift_from_hamiltonian(HamiltonianSpec(gamma=3.0), g)
    np.testing.assert_allclose(ax.values, 3 * abs(c) * c, rtol=1e-15)
    assert ay.max_abs() == 0


def test_drift_includes_b0():
    b0 = (Field2D.constant(0.5, 8), Field2D.constant(-1.0, 8))
    z = Field2D.zeros(8)
    ax, ay = drift_from_hamiltonian(HamiltonianSpec(b0=b0), (z, z))
    assert np.all(ax.values == 0.5) and np.all(ay.values == -1.0)


def test_nonconvergence():
    u = bandlimited(32, 1, scale=1.0)
    gx, gy = gradient(u)
    with pytest.raises(NonConvergence):
        solve_fp((gx * 2.0, gy * 2.0), tol=1e-14, max_iters=20)
