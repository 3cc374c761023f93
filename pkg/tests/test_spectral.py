import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from bwalab.lattice import LatticeField, dirac_discrete, inner
from bwalab.mass import MassProfile, discretize_mass
from bwalab.spectral import (
    OperatorMatrix,
    _chain_offdiag,
    assemble,
    gap_eigenvalues,
    rayleigh_quotient,
    sturm_count,
)

WALL = MassProfile.domain_wall()


@pytest.fixture(scope="module")
def wall_op():
    return assemble(WALL, 0.02, 40.0)


@pytest.fixture(scope="module")
def const_op():
    return assemble(1.0, 0.02, 40.0)


def oracle_eigs(A, lo, hi):
    return eigh_tridiagonal(A.diag, A.offdiag, eigvals_only=True, select="v", select_range=(lo, hi))


def test_structure(wall_op):
    A = wall_op
    assert A.dim == 4 * A.M + 3 and A.M == 2000
    small = assemble(WALL, 0.1, 12.0)
    S = small.dense()
    assert np.max(np.abs(S - S.T)) <= 1e-14
    assert small.bandwidth == 1
    y = np.random.default_rng(0).normal(size=small.dim)
    assert np.allclose(small.matvec(y), S @ y, atol=1e-12)


def test_quadratic_form_matches_lattice_operator():
    h, L = 0.1, 4.0
    A = assemble(MassProfile.domain_wall(length_scale=0.3), h, L, edge_tol=1e-4)
    rng = np.random.default_rng(3)
    M = A.M
    # interior field: zero near both ends so the truncation does not matter
    vals = np.zeros((2 * M + 2, 2), complex)
    vals[3:-3, 0] = rng.normal(size=2 * M - 4)
    vals[3:-3, 1] = 1j * rng.normal(size=2 * M - 4)
    psi = LatticeField(h, -M - 1, vals)
    y = A.from_spinor(psi)
    form = np.vdot(y, A.matvec(y)) * h
    Dpsi = dirac_discrete(psi)
    wall = MassProfile.domain_wall(length_scale=0.3)
    bu = discretize_mass(wall, h, -M - 1, M).values
    bv = discretize_mass(wall, h, -M - 1, M, offset=-0.5 * h).values
    mass_term = h * np.sum(bu * np.abs(vals[:, 0]) ** 2 - bv * np.abs(vals[:, 1]) ** 2)
    assert form.real == pytest.approx((inner(psi, Dpsi) + mass_term).real, rel=1e-12)


def test_plane_wave_rayleigh_quotient_tracks_symbol():
    h, L = 0.02, 40.0
    dim = 4 * int(L / h) + 3
    A = OperatorMatrix(h, L, np.zeros(dim), _chain_offdiag(dim, h), "zero", 0.0)
    M = A.M
    x = np.arange(-M - 1, M + 1) * h
    env = np.exp(-((x / 10) ** 2))
    for xi in (0.5, 1.0, 2.0, -1.5):
        wave = env * np.exp(1j * xi * x)
        psi = LatticeField(h, -M - 1, np.stack([wave, wave], axis=1) / np.sqrt(2))
        assert rayleigh_quotient(A, psi) == pytest.approx(xi, abs=5 * h)


def test_constant_mass_has_gap(const_op):
    A = const_op
    rng = np.random.default_rng(11)
    for _ in range(20):
        y = rng.normal(size=A.dim)
        assert np.linalg.norm(A.matvec(y)) >= (1 - 1e-12) * np.linalg.norm(y)
    lam = eigh_tridiagonal(A.diag, A.offdiag, eigvals_only=True, select="v", select_range=(-1.5, 1.5))
    assert np.min(np.abs(lam)) >= 1 - 1e-12


def test_rayleigh_quotient_can_vanish_for_mixed_states():
    # the Rayleigh quotient of a +/- superposition is not bounded away from zero
    A = assemble(1.0, 0.05, 10.0)
    w, V = eigh_tridiagonal(A.diag, A.offdiag, select="v", select_range=(-1.2, 1.2))
    plus, minus = V[:, np.argmin(np.abs(w - 1.1))], V[:, np.argmin(np.abs(w + 1.1))]
    y = (plus + minus) / np.sqrt(2)
    assert abs(y @ A.matvec(y)) < 0.05


def test_constant_mass_no_gap_eigenvalues(const_op):
    assert gap_eigenvalues(const_op, margin=0.1) == []


def test_wall_zero_mode(wall_op):
    pairs = gap_eigenvalues(wall_op, margin=0.1)
    assert len(pairs) == 1
    p = pairs[0]
    assert abs(p.value) <= 1e-6
    assert p.residual <= 1e-10
    assert np.linalg.norm(p.vector) == pytest.approx(1.0, abs=1e-12)
    ref = oracle_eigs(wall_op, -0.9, 0.9)
    assert ref.size == 1 and abs(ref[0] - p.value) < 1e-12


def test_zero_mode_decay(wall_op):
    p = gap_eigenvalues(wall_op, margin=0.1)[0]
    psi = wall_op.to_spinor(p.vector)
    amp = np.linalg.norm(psi.values, axis=1)
    x = psi.x
    sel = (np.abs(x) > 5) & (np.abs(x) < 15)
    rate = -np.polyfit(np.abs(x[sel]), np.log(amp[sel]), 1)[0]
    assert rate == pytest.approx(1.0, rel=0.1)


def test_count_stable_under_refinement(wall_op):
    a = gap_eigenvalues(wall_op, margin=0.1)
    b = gap_eigenvalues(assemble(WALL, 0.01, 50.0), margin=0.1)
    assert len(a) == len(b)
    assert max(abs(p.value - q.value) for p, q in zip(a, b)) <= 1e-4


def test_wide_wall_matches_oracle():
    ell = 4.0
    A = assemble(MassProfile.domain_wall(length_scale=ell), 0.02, 60.0)
    pairs = gap_eigenvalues(A, margin=0.1)
    ref = oracle_eigs(A, -0.9, 0.9)
    got = np.array([p.value for p in pairs])
    assert got.size == ref.size == 5
    assert np.allclose(got, ref, atol=1e-10)
    # bound states of the tanh(x/ell) wall: lambda_n^2 = n (2 ell - n) / ell^2
    exact = np.sqrt([n * (2 * ell - n) for n in (2, 1, 0, 1, 2)]) / ell * np.array([-1, -1, 0, 1, 1])
    assert np.allclose(got, exact, atol=5e-3)
    V = np.array([p.vector for p in pairs])
    assert np.allclose(V @ V.T, np.eye(len(pairs)), atol=1e-8)
    assert all(p.residual <= 1e-10 for p in pairs)


def test_sturm_count_matches_oracle():
    A = assemble(MassProfile.domain_wall(length_scale=2.0), 0.05, 20.0)
    w = np.linalg.eigvalsh(A.dense())
    shifts = np.linspace(-3, 3, 31) + 1e-7
    assert np.array_equal(sturm_count(A, shifts), [(w < s).sum() for s in shifts])


def test_sign_wall_admitted():
    A = assemble(MassProfile.domain_wall(shape="sign"), 0.02, 30.0)
    pairs = gap_eigenvalues(A, margin=0.1)
    assert len(pairs) == 1 and abs(pairs[0].value) <= 1e-6


def test_preconditions():
    with pytest.raises(ValueError):
        assemble(WALL, 0.03, 10.0)
    with pytest.raises(ValueError):
        assemble(WALL, 0.2, 10.0)
    with pytest.raises(ValueError):
        assemble(WALL, 0.05, 5.0)
    with pytest.raises(ValueError):
        gap_eigenvalues(assemble(1.0, 0.05, 10.0), margin=0.1)


def test_spinor_round_trip():
    A = assemble(1.0, 0.1, 2.0)
    y = np.arange(A.dim, dtype=float)
    assert np.allclose(A.from_spinor(A.to_spinor(y)).real, y)
