import numpy as np
import pytest

from bwalab.convergence import gaussian_datum
from bwalab.discrete import (
    AmplitudeState,
    _rk4,
    amplitude_rhs,
    amplitudes_to_spinor,
    bihari_horizon,
    calibrate_bihari_constant,
    evolve_amplitudes,
    evolve_discrete,
    spinor_to_amplitudes,
    step_discrete_nld,
)
from bwalab.errors import DivergenceError, HorizonError
from bwalab.lattice import LatticeField, discretize, l2h_norm, window_for
from bwalab.mass import MassProfile, discretize_mass

rng = np.random.default_rng(99)


def gaussian_field(h, W=12.0):
    return discretize(gaussian_datum, h, *window_for(W, h))


# --- amplitude model -----------------------------------------------------


def test_zero_amplitudes_stay_zero():
    a0 = AmplitudeState(0.1, -21, np.zeros(42))
    out = evolve_amplitudes(a0, 1.0, 0.3)
    assert np.all(out[-1].values == 0)


def test_single_site_nonlinear_phase():
    # k = 0, beta = 0: i a' = -|a|^2 a with |a| = 1 gives a = exp(i z)
    a = np.array([1.0 + 0j])
    m = np.array([0])
    dz = 1e-3
    for _ in range(1000):
        a = _rk4(lambda y: amplitude_rhs(y, m, 0.0, 0.0), a, dz)
    assert a[0] == pytest.approx(np.exp(1j), abs=1e-12)
    assert abs(a[0]) == pytest.approx(1.0, abs=1e-13)


def test_amplitude_norm_conserved():
    h = 0.1
    psi = gaussian_field(h)
    out = evolve_amplitudes(spinor_to_amplitudes(psi), 1.0, 1.0)
    n0, n1 = (np.linalg.norm(s.values) for s in (out[0], out[-1]))
    assert abs(n1 - n0) / n0 <= 1e-8


def test_spinor_map_examples():
    a = np.zeros(6)
    a[3] = 1.0  # index 0 in a window starting at m = -3
    psi = amplitudes_to_spinor(AmplitudeState(1.0, -3, a))
    assert psi.origin == -1
    assert psi.values[1, 0] == 1.0 and np.all(psi.values[:, 1] == 0)

    a = np.zeros(6)
    a[4] = 1.0  # a_1
    psi = amplitudes_to_spinor(AmplitudeState(1.0, -3, a))
    assert psi.values[2, 1] == -1j
    assert np.count_nonzero(psi.values) == 1


def test_spinor_map_round_trip_exact():
    psi = LatticeField(0.2, -7, rng.normal(size=(15, 2)) + 1j * rng.normal(size=(15, 2)))
    back = amplitudes_to_spinor(spinor_to_amplitudes(psi))
    assert back.origin == psi.origin
    assert np.array_equal(back.values, psi.values)
    with pytest.raises(ValueError):
        amplitudes_to_spinor(AmplitudeState(1.0, 0, np.ones(4)))


def test_amplitude_and_spinor_models_agree():
    h = 0.1
    psi0 = gaussian_field(h)
    amps = evolve_amplitudes(spinor_to_amplitudes(psi0), 1.0, 0.5)[-1]
    direct = evolve_discrete(psi0, 1.0, 0.5).final
    mapped = amplitudes_to_spinor(amps)
    assert l2h_norm(mapped.with_values(mapped.values - direct.values)) <= 1e-8


def test_dz_stability_guard():
    a0 = AmplitudeState(0.1, -1, np.ones(2))
    with pytest.raises(ValueError):
        evolve_amplitudes(a0, 1.0, 1.0, dz=0.5)
    with pytest.raises(ValueError):
        evolve_discrete(gaussian_field(0.1), 1.0, 1.0, dz=0.2)


# --- discrete nonlinear Dirac --------------------------------------------


def test_zero_datum_stays_zero():
    traj = evolve_discrete(LatticeField.zeros(0.1, -10, 10), 1.0, 0.5)
    assert np.all(traj.final.values == 0)


def test_norm_conserved_constant_and_wall():
    h = 0.1
    psi0 = gaussian_field(h)
    for mass in (1.0, MassProfile.domain_wall()):
        traj = evolve_discrete(psi0, mass, 1.0, snapshot_zs=[0.25, 0.5, 0.75])
        assert traj.zs == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert traj.norm_drift() <= 1e-8


def test_mass_field_forms_agree():
    h = 0.1
    psi0 = gaussian_field(h)
    wall = MassProfile.domain_wall()
    a = evolve_discrete(psi0, wall, 0.2).final
    b = evolve_discrete(psi0, discretize_mass(wall, h, psi0.origin, psi0.last), 0.2).final
    assert np.array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        evolve_discrete(psi0, MassProfile.domain_wall(shape="sign"), 0.2)
    with pytest.raises(ValueError):
        evolve_discrete(psi0, discretize_mass(wall, h, 0, 5), 0.2)


def test_step_forward_backward():
    h = 0.1
    psi = gaussian_field(h, 6.0)
    there = step_discrete_nld(psi, 1.0, 0.005)
    back = step_discrete_nld(there, 1.0, -0.005)
    assert np.max(np.abs(back.values - psi.values)) <= 1e-9
    assert np.array_equal(step_discrete_nld(psi, 1.0, 0.0).values, psi.values)


def test_divergence_detected():
    psi = LatticeField(0.5, 0, np.full((3, 2), 3e5 + 0j))
    with pytest.raises(DivergenceError):
        evolve_discrete(psi, 0.0, 1.0, dz=0.05)


# --- Bihari bound --------------------------------------------------------


def test_bihari_values():
    T_max, A = bihari_horizon(1.0, 1.0)
    assert T_max == 0.5
    assert A(0.25) == pytest.approx(np.sqrt(2), abs=1e-14)
    for M, C in ((0.3, 2.0), (4.0, 0.01)):
        assert bihari_horizon(M, C)[1](0.0) == pytest.approx(M, rel=1e-14)
    with pytest.raises(HorizonError):
        A(0.5)
    with pytest.raises(ValueError):
        bihari_horizon(0.0, 1.0)


def test_calibrated_constant_bounds_the_burn_in():
    h = 0.1
    zs = np.linspace(0, 0.1, 11)
    traj = evolve_discrete(gaussian_field(h), 1.0, 0.1, snapshot_zs=list(zs[1:]))
    C = calibrate_bihari_constant(traj.zs, traj.h1h)
    _, A = bihari_horizon(traj.h1h[0], C)
    for z, H in zip(traj.zs, traj.h1h):
        assert H <= A(z) * (1 + 1e-12)
