import numpy as np
import pytest

from bwalab.continuum import ContinuumField, evolve_continuum
from bwalab.mass import MassProfile
from bwalab.standing import (
    PhaseState,
    WaveProfile,
    domain_wall_wave,
    fit_decay_rate,
    hamiltonian,
    homoclinic_orbit,
    level_curve,
    stationary_residual,
    vector_field,
)

KAPPA = np.sqrt(0.75)


@pytest.fixture(scope="module")
def orbit():
    return homoclinic_orbit(1.0, 0.5)


@pytest.fixture(scope="module")
def wall_wave():
    return domain_wall_wave(MassProfile.domain_wall(), 0.5)


# --- Hamiltonian structure -----------------------------------------------


def test_hamiltonian_values():
    assert hamiltonian(0.0, 0.0, 1.0, 0.5) == 0.0
    assert hamiltonian(1.0, 0.0, 1.0, 0.5) == pytest.approx(0.0, abs=1e-16)
    assert hamiltonian(1.0, 1.0, 1.0, 0.5) == pytest.approx(1.0, abs=1e-15)


def test_vector_field_values():
    assert vector_field(PhaseState(0.0, 0.0), 1.0, 0.5) == (0.0, 0.0)
    du, dv = vector_field(PhaseState(1.0, 0.0), 1.0, 0.5)
    assert (du, dv) == (pytest.approx(0.0), pytest.approx(0.5))
    with pytest.raises(ValueError):
        PhaseState(np.nan, 0.0)


def test_vector_field_is_symplectic_gradient():
    rng = np.random.default_rng(7)
    eps = 1e-6
    for _ in range(50):
        u, v = rng.uniform(-2, 2, 2)
        beta, omega = 1.3, 0.4
        dHu = (hamiltonian(u + eps, v, beta, omega) - hamiltonian(u - eps, v, beta, omega)) / (2 * eps)
        dHv = (hamiltonian(u, v + eps, beta, omega) - hamiltonian(u, v - eps, beta, omega)) / (2 * eps)
        du, dv = vector_field((u, v), beta, omega)
        assert du == pytest.approx(-dHv, rel=1e-8, abs=1e-8)
        assert dv == pytest.approx(dHu, rel=1e-8, abs=1e-8)


def test_level_curve_lies_on_zero_set():
    for lobe in level_curve(1.0, 0.5):
        u, v = lobe
        assert np.max(np.abs(hamiltonian(u, v, 1.0, 0.5))) < 1e-14
    with pytest.raises(ValueError):
        level_curve(1.0, 1.5)


def test_fit_decay_rate_exact_exponential():
    x = np.linspace(5, 10, 101)
    assert fit_decay_rate(x, 3 * np.exp(-0.7 * x)) == pytest.approx(0.7, rel=1e-12)


# --- constant-mass homoclinic --------------------------------------------


def test_orbit_starts_on_initial_datum(orbit):
    i = np.argmin(np.abs(orbit.xs))
    assert orbit.us[i] == pytest.approx(1.0, abs=1e-12)
    assert orbit.vs[i] == pytest.approx(0.0, abs=1e-12)


def test_orbit_conserves_energy(orbit):
    assert orbit.diagnostics["max_abs_H"] <= 1e-8


def test_orbit_sector_and_angle(orbit):
    d = orbit.diagnostics
    assert d["sector_holds"] and np.all(orbit.us**2 > orbit.vs**2)
    assert d["theta_increasing"]
    assert d["theta_rate_error"] <= 1e-6


def test_orbit_decay_rate(orbit):
    assert orbit.diagnostics["decay_rate"] == pytest.approx(KAPPA, rel=0.02)
    assert orbit.diagnostics["kappa"] == pytest.approx(KAPPA, rel=1e-15)


def test_orbit_is_even_odd(orbit):
    # u is even and v odd for the constant-mass soliton
    assert np.max(np.abs(orbit.us - orbit.us[::-1])) < 1e-9
    assert np.max(np.abs(orbit.vs + orbit.vs[::-1])) < 1e-9


def test_residual_certificate(orbit):
    assert stationary_residual(orbit, 1.0) <= 1e-6
    bad = WaveProfile(orbit.xs, 1.1 * orbit.us, orbit.vs, orbit.omega, orbit.mass_id)
    assert stationary_residual(bad, 1.0) >= 1e-2
    zero = WaveProfile(orbit.xs, 0 * orbit.us, 0 * orbit.vs, 0.5, "zero")
    assert stationary_residual(zero, 1.0) == 0.0


def test_frequency_precondition():
    for omega in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ValueError):
            homoclinic_orbit(1.0, omega)


def test_orbit_propagates_as_standing_wave(orbit):
    F = ContinuumField.from_function(orbit.spinor, 32.0, 2048)
    out = evolve_continuum(F, 1.0, 1.0, 1e-3).final
    err = np.sqrt(F.dx * np.sum(np.abs(out.values - np.exp(-0.5j) * F.values) ** 2))
    assert err <= 1e-6


def test_other_frequency():
    prof = homoclinic_orbit(2.0, 0.7)
    assert prof.diagnostics["max_abs_H"] <= 1e-8
    assert prof.diagnostics["decay_rate"] == pytest.approx(np.sqrt(4 - 0.49), rel=0.02)
    assert stationary_residual(prof, 2.0) <= 1e-6


# --- domain wall ---------------------------------------------------------


def test_wall_wave_certificates(wall_wave):
    d = wall_wave.diagnostics
    assert d["matching_defect"] <= 1e-10
    assert stationary_residual(wall_wave, MassProfile.domain_wall()) <= 1e-6
    assert d["decay_rate"] == pytest.approx(KAPPA, rel=0.05)
    assert d["tail_ratio"] <= 1e-8


def test_wall_wave_odd_swap_symmetry(wall_wave):
    # the computed wave satisfies u(x) = -v(-x), the image of (u, v)(x) -> (-v, -u)(-x)
    assert wall_wave.diagnostics["odd_swap_symmetry_defect"] <= 1e-6


def test_wall_wave_rejects_gap_eigenvalue_and_sign():
    with pytest.raises(ValueError):
        domain_wall_wave(MassProfile.domain_wall(), 0.5, gap_eigenvalues=[0.5004])
    with pytest.raises(ValueError):
        domain_wall_wave(MassProfile.domain_wall(shape="sign"), 0.5)
    with pytest.raises(ValueError):
        domain_wall_wave(MassProfile.constant(1.0), 0.5)


def test_wall_wave_propagates(wall_wave):
    wall = MassProfile.domain_wall()
    F = ContinuumField.from_function(wall_wave.spinor, 32.0, 2048)
    out = evolve_continuum(F, wall, 1.0, 1e-3).final
    err = np.sqrt(F.dx * np.sum(np.abs(out.values - np.exp(-0.5j) * F.values) ** 2))
    assert err <= 1e-5
