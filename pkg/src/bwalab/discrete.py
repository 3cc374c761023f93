"""Time evolution of the binary-waveguide amplitudes and of the discrete nonlinear Dirac system.

Both models are integrated with classical RK4 on a finite window with zero exterior.
The self-focusing coefficient is fixed to 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError, HorizonError
from .lattice import LatticeField, h1h_norm, l2h_norm, linf_norm
from .mass import MassProfile, discretize_mass

__all__ = [
    "AmplitudeState",
    "DiscreteTrajectory",
    "default_dz",
    "stability_bound",
    "evolve_amplitudes",
    "amplitudes_to_spinor",
    "spinor_to_amplitudes",
    "discrete_rhs",
    "step_discrete_nld",
    "evolve_discrete",
    "mass_field",
    "bihari_horizon",
    "calibrate_bihari_constant",
]

DIVERGENCE_LIMIT = 1e6
# RK4 is stable on the imaginary axis up to |lambda dz| = 2.83; the linear part has
# spectral radius about 2/h + beta, so dz <= h keeps a safety factor of ~1.4.
STABILITY_FACTOR = 1.0


def default_dz(h: float) -> float:
    return min(0.1 * h, 0.01)


def stability_bound(h: float) -> float:
    return STABILITY_FACTOR * h


@dataclass(frozen=True)
class AmplitudeState:
    """Waveguide amplitudes ``a_m`` for ``m = origin .. origin + len - 1`` at position ``z``.

    The coupling between neighbouring guides is ``k = 1/h``.
    """

    h: float
    origin: int
    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-d array")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> float:
        return 1.0 / self.h

    @property
    def m(self) -> np.ndarray:
        return np.arange(self.origin, self.origin + self.values.size)


@dataclass
class DiscreteTrajectory:
    zs: list = field(default_factory=list)
    states: list = field(default_factory=list)
    l2h: list = field(default_factory=list)
    h1h: list = field(default_factory=list)
    linf: list = field(default_factory=list)

    def record(self, z: float, psi: LatticeField):
        if self.zs and z <= self.zs[-1]:
            raise ValueError("snapshot positions must be strictly increasing")
        self.zs.append(float(z))
        self.states.append(psi)
        self.l2h.append(l2h_norm(psi))
        self.h1h.append(h1h_norm(psi))
        self.linf.append(linf_norm(psi))

    @property
    def final(self) -> LatticeField:
        return self.states[-1]

    def norm_drift(self) -> float:
        n = np.asarray(self.l2h)
        return float(np.max(np.abs(n - n[0])) / n[0]) if n[0] > 0 else float(np.max(n))


def _rk4(f: Callable, y: np.ndarray, dz: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dz * k1)
    k3 = f(y + 0.5 * dz * k2)
    k4 = f(y + dz * k3)
    return y + (dz / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _march(f, y, z0, targets, dz, guard_h=None, on_snapshot=None):
    """Step ``y`` from ``z0`` through each target, shortening the last step to land exactly."""
    z = z0
    for target in targets:
        while z < target - 1e-13 * max(1.0, abs(target)):
            step = min(dz, target - z)
            # overflow on the way to a blow-up is reported by the guard below
            with np.errstate(over="ignore", invalid="ignore"):
                y = _rk4(f, y, step)
            z = target if step < dz else z + step
            sup = float(np.max(np.abs(y)))
            if not np.isfinite(sup) or sup > DIVERGENCE_LIMIT:
                raise DivergenceError(z, sup, guard_h)
        on_snapshot(target, y)
    return y


def _targets(z0: float, z_end: float, snapshot_zs) -> list:
    if z_end < z0:
        raise ValueError("z_end must not precede the initial position")
    zs = sorted({float(s) for s in (snapshot_zs or [])} | {float(z_end)})
    if zs[0] < z0 or zs[-1] > z_end:
        raise ValueError("snapshot positions must lie in [z0, z_end]")
    return [s for s in zs if s > z0]


# ---------------------------------------------------------------------------
# amplitude model


def amplitude_rhs(a: np.ndarray, m: np.ndarray, k: float, beta: float) -> np.ndarray:
    """``da/dz`` for ``i a_m' = -k (a_{m+1} + a_{m-1}) + (-1)^m beta a_m - |a_m|^2 a_m``."""
    nb = np.zeros_like(a)
    nb[:-1] += a[1:]
    nb[1:] += a[:-1]
    stagger = np.where(m % 2 == 0, beta, -beta)
    return -1j * (-k * nb + stagger * a - np.abs(a) ** 2 * a)


def evolve_amplitudes(
    a0: AmplitudeState,
    beta: float,
    z_end: float,
    dz: float | None = None,
    snapshot_zs: Sequence[float] | None = None,
) -> list[AmplitudeState]:
    """Integrate the waveguide-array equations; returns the datum plus every snapshot."""
    dz = default_dz(a0.h) if dz is None else dz
    if not 0 < dz <= stability_bound(a0.h):
        raise ValueError(f"dz={dz} outside (0, {stability_bound(a0.h)}]")
    m, k = a0.m, a0.k
    out = [a0]
    f = lambda a: amplitude_rhs(a, m, k, beta)
    _march(
        f, a0.values.copy(), a0.z, _targets(a0.z, z_end, snapshot_zs), dz, a0.h,
        lambda z, a: out.append(AmplitudeState(a0.h, a0.origin, a.copy(), z)),
    )
    return out


def amplitudes_to_spinor(a: AmplitudeState) -> LatticeField:
    """``psi1(x_n) = (-1)^n a_{2n}``, ``psi2(x_n) = i (-1)^n a_{2n-1}``.

    The amplitude window must start at an odd index and end at an even one, so that
    it covers exactly the pairs ``(2n-1, 2n)`` of the spinor sites.
    """
    if a.origin % 2 == 0 or (a.origin + a.values.size - 1) % 2 != 0:
        raise ValueError("amplitude window must run from an odd index to an even index")
    lo = (a.origin + 1) // 2
    pairs = a.values.reshape(-1, 2)  # columns: a_{2n-1}, a_{2n}
    n = np.arange(lo, lo + pairs.shape[0])
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    psi = np.stack([sign * pairs[:, 1], 1j * sign * pairs[:, 0]], axis=1)
    return LatticeField(a.h, lo, psi)


def spinor_to_amplitudes(psi: LatticeField, z: float = 0.0) -> AmplitudeState:
    if psi.values.ndim != 2 or psi.values.shape[1] != 2:
        raise ValueError("expected a spinor field")
    sign = np.where(psi.n % 2 == 0, 1.0, -1.0)
    a = np.empty(2 * psi.size, dtype=complex)
    a[1::2] = sign * psi.values[:, 0]
    a[0::2] = -1j * sign * psi.values[:, 1]
    return AmplitudeState(psi.h, 2 * psi.origin - 1, a, z)


# ---------------------------------------------------------------------------
# discrete nonlinear Dirac system


def mass_field(mass, psi: LatticeField):
    """Resolve ``mass`` (number, :class:`MassProfile` or lattice field) to samples on ``psi``'s window."""
    if isinstance(mass, (int, float, np.floating)):
        return float(mass)
    if isinstance(mass, MassProfile):
        if not mass.smooth:
            raise ValueError("the sign mass is a spectral reference only, not a dynamics input")
        if mass.is_constant:
            return mass.beta
        return discretize_mass(mass, psi.h, psi.origin, psi.last).values
    if isinstance(mass, LatticeField):
        if mass.origin != psi.origin or mass.size != psi.size or not np.isclose(mass.h, psi.h):
            raise ValueError("mass field window does not match the spinor window")
        return np.real(mass.values)
    raise TypeError(f"unsupported mass {mass!r}")


def discrete_rhs(psi: np.ndarray, beta, h: float) -> np.ndarray:
    """``dpsi/dz = -i (D_h psi + beta sigma3 psi - G(psi) psi)`` on a window with zero exterior."""
    p1, p2 = psi[:, 0], psi[:, 1]
    d2 = np.empty_like(p2)
    d2[:-1] = p2[1:] - p2[:-1]
    d2[-1] = -p2[-1]
    d1 = np.empty_like(p1)
    d1[1:] = p1[1:] - p1[:-1]
    d1[0] = p1[0]
    out = np.empty_like(psi)
    out[:, 0] = -(d2 / h) - 1j * (beta - np.abs(p1) ** 2) * p1
    out[:, 1] = -(d1 / h) - 1j * (-beta - np.abs(p2) ** 2) * p2
    return out


def step_discrete_nld(psi: LatticeField, beta, dz: float) -> LatticeField:
    """One RK4 step (``dz`` may be negative for backward integration)."""
    b = mass_field(beta, psi)
    y = _rk4(lambda p: discrete_rhs(p, b, psi.h), np.asarray(psi.values, dtype=complex), dz)
    return psi.with_values(y)


def evolve_discrete(
    psi0: LatticeField,
    mass,
    z_end: float,
    dz: float | None = None,
    snapshot_zs: Sequence[float] | None = None,
) -> DiscreteTrajectory:
    """Evolve the discrete nonlinear Dirac system from ``z = 0`` to ``z_end``.

    The trajectory holds the datum and a snapshot at every requested position
    (``z_end`` is always included) together with their L2_h, H1_h and sup norms.
    """
    h = psi0.h
    dz = default_dz(h) if dz is None else dz
    if not 0 < dz <= stability_bound(h):
        raise ValueError(f"dz={dz} outside (0, {stability_bound(h)}]")
    b = mass_field(mass, psi0)
    traj = DiscreteTrajectory()
    traj.record(0.0, psi0)
    _march(
        lambda p: discrete_rhs(p, b, h),
        np.asarray(psi0.values, dtype=complex),
        0.0,
        _targets(0.0, z_end, snapshot_zs),
        dz,
        h,
        lambda z, y: traj.record(z, psi0.with_values(y.copy())),
    )
    return traj


# ---------------------------------------------------------------------------
# a-priori H1_h bound


def bihari_horizon(M: float, C: float):
    """Existence horizon ``T_max = 1/(2 C M^2)`` and the bound ``A(T) = (M^-2 - 2 C T)^-1/2``."""
    if not (M > 0 and C > 0):
        raise ValueError("M and C must be positive")
    T_max = 1.0 / (2.0 * C * M * M)

    def A(T: float) -> float:
        if T >= T_max:
            raise HorizonError(f"T={T} is beyond the horizon T_max={T_max:.6g}")
        return 1.0 / np.sqrt(M ** -2 - 2.0 * C * T)

    return T_max, A


def calibrate_bihari_constant(zs, h1h, floor: float = 1e-12) -> float:
    """Smallest ``C`` with ``H(z) <= H(0) + C int_0^z H^3`` along a sampled burn-in.

    ``zs``/``h1h`` are the positions and H1_h norms of a short trajectory.  The
    integral is evaluated with the trapezoid rule.
    """
    zs = np.asarray(zs, dtype=float)
    H = np.asarray(h1h, dtype=float)
    if zs.size < 2:
        return floor
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (H[1:] ** 3 + H[:-1] ** 3) * np.diff(zs))])
    growth = H[1:] - H[0]
    ratios = np.where(integral[1:] > 0, growth / np.where(integral[1:] > 0, integral[1:], 1), 0)
    return float(max(floor, np.max(ratios)))
