"""Finite-section spectra of ``D + beta sigma3`` on the lattice.

With ``psi = (u, i v)`` the discrete operator becomes the real symmetric matrix
``[[beta, d_h], [-d*_h, -beta]]``.  Ordering the unknowns as
``u_{-M-1}, v_{-M}, u_{-M}, v_{-M+1}, ..., v_M, u_M`` turns it into a tridiagonal
matrix: ``u_n`` sits between ``v_n`` and ``v_{n+1}``, i.e. at ``x_n + h/2``.  The
second component therefore receives the mass averaged over the half-shifted cell
``[x_n - h/2, x_n + h/2]``; with that choice an odd wall gives a reflection-symmetric
chain whose spectrum is exactly symmetric about zero.

Eigenvalues inside the gap are isolated by Sturm-count bisection and refined by
inverse iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .lattice import LatticeField
from .mass import MassProfile, discretize_mass

__all__ = [
    "OperatorMatrix",
    "GapEigenpair",
    "assemble",
    "sturm_count",
    "gap_eigenvalues",
    "rayleigh_quotient",
]


MIN_MARGIN = 5.0


@dataclass(frozen=True)
class OperatorMatrix:
    """Symmetric tridiagonal finite section (``diag``, ``offdiag``) of ``D_h + beta_h sigma3``."""

    h: float
    L: float
    diag: np.ndarray
    offdiag: np.ndarray
    mass_id: str
    beta_inf: float

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def M(self) -> int:
        return (self.dim - 3) // 4

    @property
    def bandwidth(self) -> int:
        return 1

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, y: np.ndarray) -> np.ndarray:
        out = self.diag * y
        out[:-1] += self.offdiag * y[1:]
        out[1:] += self.offdiag * y[:-1]
        return out

    def to_spinor(self, y: np.ndarray) -> LatticeField:
        """Chain vector -> spinor field ``(u, i v)`` on sites ``-M-1..M`` (``v_{-M-1} = 0``)."""
        M = self.M
        psi = np.zeros((2 * M + 2, 2), dtype=complex)
        psi[:, 0] = y[0::2]
        psi[1:, 1] = 1j * y[1::2]
        return LatticeField(self.h, -M - 1, psi)

    def from_spinor(self, psi: LatticeField) -> np.ndarray:
        """Spinor ``(psi1, psi2)`` -> complex chain vector ``(psi1, -i psi2)``."""
        M = self.M
        vals = psi.take(-M - 1, M)
        y = np.empty(self.dim, dtype=complex)
        y[0::2] = vals[:, 0]
        y[1::2] = -1j * vals[1:, 1]
        return y


def assemble(mass: MassProfile | float, h: float, L: float, edge_tol: float = 1e-6) -> OperatorMatrix:
    """Finite section on ``[-L, L]`` with zero boundary values.

    ``u`` (first component) lives on sites ``-M-1..M`` and ``v`` on ``-M..M`` with
    ``M = L/h``.
    """
    if isinstance(mass, (int, float)):
        mass = MassProfile.constant(mass)
    M = int(round(L / h))
    if not np.isclose(M * h, L, rtol=1e-9, atol=1e-12) or M < 2:
        raise ValueError(f"L/h must be an integer >= 2, got L={L}, h={h}")
    if h > 0.1:
        raise ValueError("finite section requires h <= 0.1")
    if not mass.is_constant:
        edge = float(max(abs(mass(L) - mass.beta_inf), abs(mass(-L) + mass.beta_inf)))
        if edge > edge_tol * mass.beta_inf:
            raise ValueError(f"window too small for the wall: |beta(+-L) -+ beta_inf| = {edge:.2e}")
    bu = discretize_mass(mass, h, -M - 1, M).values
    bv = discretize_mass(mass, h, -M, M, offset=-0.5 * h).values
    dim = 4 * M + 3
    diag = np.empty(dim)
    diag[0::2] = bu
    diag[1::2] = -bv
    return OperatorMatrix(h, float(L), diag, _chain_offdiag(dim, h), mass.id, mass.beta_inf)


def _chain_offdiag(dim: int, h: float) -> np.ndarray:
    # order u_{-M-1}, v_{-M}, u_{-M}, ...: entry (u_{n-1}, v_n) = +1/h, (v_n, u_n) = -1/h
    off = np.empty(dim - 1)
    off[0::2] = 1.0 / h
    off[1::2] = -1.0 / h
    return off


def sturm_count(A: OperatorMatrix, shifts) -> np.ndarray:
    """Number of eigenvalues strictly below each shift (LDL^T inertia of ``A - s``)."""
    s = np.atleast_1d(np.asarray(shifts, dtype=float))
    d, e2 = A.diag, A.offdiag**2
    tiny = np.finfo(float).tiny ** 0.5
    q = d[0] - s
    count = (q < 0).astype(int)
    for i in range(1, d.size):
        q = np.where(q == 0, tiny, q)
        q = (d[i] - s) - e2[i - 1] / q
        count += q < 0
    return count


@dataclass(frozen=True)
class GapEigenpair:
    value: float
    vector: np.ndarray
    residual: float


def _bisect(A: OperatorMatrix, lo: float, hi: float, k: int, tol: float, sections: int = 64) -> float:
    """k-th eigenvalue (0-based, counted from lo) inside (lo, hi).

    Multisection: each Sturm sweep evaluates ``sections - 1`` shifts at once, which
    costs about the same as a single shift since the recurrence is sequential.
    """
    base = int(sturm_count(A, lo)[0])
    a, b = lo, hi
    while b - a > tol:
        shifts = np.linspace(a, b, sections + 1)[1:-1]
        above = np.nonzero(sturm_count(A, shifts) - base > k)[0]
        j = above[0] if above.size else sections - 1
        a, b = (shifts[j - 1] if j > 0 else a), (shifts[j] if j < sections - 1 else b)
    return 0.5 * (a + b)


def _inverse_iteration(A: OperatorMatrix, lam: float, iters: int = 6):
    n = A.dim
    shift = lam + 1e-14 * max(1.0, np.max(np.abs(A.diag)) + 2 * np.max(np.abs(A.offdiag)))
    ab = np.zeros((3, n))
    ab[0, 1:] = A.offdiag
    ab[1] = A.diag - shift
    ab[2, :-1] = A.offdiag
    y = np.ones(n) / np.sqrt(n)
    for _ in range(iters):
        y = solve_banded((1, 1), ab, y, check_finite=False)
        y /= np.linalg.norm(y)
    rq = float(y @ A.matvec(y))
    return rq, y


def gap_eigenvalues(A: OperatorMatrix, margin: float | None = None, gap=None, tol: float = 1e-10):
    """Eigenpairs inside ``(-beta_inf + margin, beta_inf - margin)``.

    ``margin`` defaults to ``10 h`` and may not go below ``5 h`` (band-edge pollution).
    Each returned pair carries the residual ``||A phi - lambda phi||`` of the
    normalized eigenvector.
    """
    margin = 10 * A.h if margin is None else margin
    if margin < MIN_MARGIN * A.h - 1e-12:
        raise ValueError(f"gap margin {margin} below {MIN_MARGIN} h = {MIN_MARGIN * A.h}")
    lo, hi = gap if gap is not None else (-A.beta_inf + margin, A.beta_inf - margin)
    counts = sturm_count(A, [lo, hi])
    k_total = int(counts[1] - counts[0])
    pairs = []
    width_tol = 1e-15 * max(1.0, 2 / A.h)
    for k in range(k_total):
        lam = _bisect(A, lo, hi, k, width_tol)
        rq, y = _inverse_iteration(A, lam)
        # orthogonalize against earlier members of a cluster
        for p in pairs:
            if abs(p.value - rq) < 1e-6:
                y = y - (p.vector @ y) * p.vector
                y /= np.linalg.norm(y)
                rq = float(y @ A.matvec(y))
        res = float(np.linalg.norm(A.matvec(y) - rq * y))
        if y[np.argmax(np.abs(y))] < 0:
            y = -y
        pairs.append(GapEigenpair(rq, y, res))
    return pairs


def rayleigh_quotient(A: OperatorMatrix, psi: LatticeField) -> float:
    """``<psi, (D_h + beta_h sigma3) psi> / <psi, psi>`` for a spinor supported in the section."""
    y = A.from_spinor(psi)
    return float(np.real(np.vdot(y, A.matvec(y)) / np.vdot(y, y)))
