import numpy as np
import pytest

from bwalab.continuum import (
    ContinuumField,
    evolve_continuum,
    free_dirac_step,
    l2_norm,
    phase_step,
    required_half_width,
    strang_step,
)
from bwalab.convergence import gaussian_datum
from bwalab.errors import BoundaryContaminationError, DivergenceError
from bwalab.mass import MassProfile


def gaussian(L=20.0, N=1024):
    return ContinuumField.from_function(gaussian_datum, L, N)


def test_grid_and_validation():
    psi = gaussian(10.0, 64)
    assert psi.x[0] == -10.0 and psi.dx == pytest.approx(20 / 64)
    with pytest.raises(ValueError):
        ContinuumField(1.0, 100, np.zeros((100, 2)))
    with pytest.raises(ValueError):
        ContinuumField(1.0, 64, np.zeros((64, 3)))


def test_spectral_derivative():
    L, N = 20.0, 512
    psi = ContinuumField.from_function(lambda x: np.stack([np.exp(-x**2), np.sin(np.pi * x / L)], -1), L, N)
    d = psi.derivative()
    x = psi.x
    assert np.max(np.abs(d[:, 0] + 2 * x * np.exp(-x**2))) < 1e-10
    assert np.max(np.abs(d[:, 1] - np.pi / L * np.cos(np.pi * x / L))) < 1e-10


def test_free_step_identity_and_single_mode():
    psi = gaussian(10.0, 128)
    assert np.allclose(free_dirac_step(psi, 0.0).values, psi.values, atol=1e-15)
    L, N = 2 * np.pi, 64
    grid = ContinuumField(L, N, np.zeros((N, 2)))
    xi0 = grid.xi[3]
    mode = np.exp(1j * xi0 * grid.x)[:, None] * np.array([1, 1]) / np.sqrt(2)
    out = free_dirac_step(grid.with_values(mode), 0.37)
    assert np.allclose(out.values, np.exp(-1j * 0.37 * xi0) * mode, atol=1e-13)
    assert l2_norm(out) == pytest.approx(l2_norm(grid.with_values(mode)), rel=1e-13)


def test_phase_step_examples():
    L, N = 4.0, 16
    vals = np.zeros((N, 2), complex)
    vals[5, 0] = 1.0
    out = phase_step(ContinuumField(L, N, vals), 1.0, np.pi)
    assert out.values[5, 0] == pytest.approx(1.0, abs=1e-15)
    assert np.all(phase_step(ContinuumField(L, N, np.zeros((N, 2))), 1.0, 0.3).values == 0)
    rng = np.random.default_rng(5)
    rnd = ContinuumField(L, N, rng.normal(size=(N, 2)) + 1j * rng.normal(size=(N, 2)))
    moved = phase_step(rnd, MassProfile.domain_wall(), 0.77)
    assert np.allclose(np.abs(moved.values), np.abs(rnd.values), rtol=1e-15, atol=0)


def test_zero_datum_and_snapshots():
    zero = ContinuumField(5.0, 32, np.zeros((32, 2)))
    traj = evolve_continuum(zero, 1.0, 0.1, 0.01, snapshot_zs=[0.05])
    assert traj.zs == [0.0, 0.05, 0.1]
    assert np.all(traj.final.values == 0)


def test_strang_second_order():
    psi = gaussian(20.0, 1024)
    wall = MassProfile.domain_wall()
    runs = [evolve_continuum(psi, wall, 0.5, dz).final.values for dz in (0.02, 0.01, 0.005)]
    r = np.linalg.norm(runs[0] - runs[1]) / np.linalg.norm(runs[1] - runs[2])
    assert 3.5 <= r <= 4.5


def test_unitarity_over_many_steps():
    psi = gaussian(20.0, 256)
    y = psi
    n0 = l2_norm(psi)
    for _ in range(2000):
        y = strang_step(y, 1.0, 1e-3)
    assert abs(l2_norm(y) - n0) / n0 <= 1e-12


def test_boundary_guard():
    psi = gaussian(5.0, 256)
    with pytest.raises(BoundaryContaminationError):
        evolve_continuum(psi, 1.0, 4.0, 0.01)
    L = required_half_width(4.0, 1.0)
    ok = evolve_continuum(gaussian(L, 512), 1.0, 1.0, 0.01)
    assert ok.final.z == 1.0


def test_sign_mass_rejected_and_divergence_guard():
    with pytest.raises(ValueError):
        evolve_continuum(gaussian(10.0, 64), MassProfile.domain_wall(shape="sign"), 0.1, 0.01)
    big = ContinuumField(5.0, 16, np.full((16, 2), 2e6 + 0j))
    with pytest.raises(DivergenceError):
        evolve_continuum(big, 1.0, 0.01, 0.01, check_boundary=False)


def test_linf_growth_rate():
    traj = evolve_continuum(gaussian(20.0, 512), 1.0, 0.5, 0.01, snapshot_zs=[0.1, 0.2, 0.3, 0.4])
    C = traj.linf_growth_rate()
    m0 = traj.linf[0]
    for z, m in zip(traj.zs, traj.linf):
        assert m <= np.exp(C * z) * m0 * (1 + 1e-12)
