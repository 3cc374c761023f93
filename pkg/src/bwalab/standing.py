"""Localized standing waves ``Psi = exp(-i omega z) (u, i v)``.

Constant mass: the profile is the homoclinic orbit of the planar Hamiltonian system
started from the turning point on the zero level set.  Domain wall: the profile is
found by shooting inward from both ends along the decaying directions and matching
at ``x = 0`` with a 2x2 Newton iteration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import HomoclinicError, ShootingError
from .mass import MassProfile

__all__ = [
    "PhaseState",
    "WaveProfile",
    "hamiltonian",
    "vector_field",
    "level_curve",
    "homoclinic_orbit",
    "stationary_residual",
    "domain_wall_wave",
    "fit_decay_rate",
    "angle_diagnostics",
    "swap_symmetry_defect",
]

ODE_RTOL = 1e-13
ODE_ATOL = 1e-16
SWITCH_RADIUS = 1e-5


@dataclass(frozen=True)
class PhaseState:
    u: float
    v: float
    x: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.u) and np.isfinite(self.v) and np.isfinite(self.x)):
            raise ValueError("phase state entries must be finite")


@dataclass
class WaveProfile:
    """Real profile ``(u, v)`` on a uniform grid symmetric about 0."""

    xs: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    omega: float
    mass_id: str
    diagnostics: dict = field(default_factory=dict)
    evaluate: Callable | None = field(default=None, repr=False)

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def amplitude(self) -> np.ndarray:
        return np.hypot(self.us, self.vs)

    def spinor(self, x=None) -> np.ndarray:
        """``Phi = (u, i v)`` as an ``(M, 2)`` complex array, at ``x`` or on the stored grid."""
        if x is None:
            u, v = self.us, self.vs
        else:
            u, v = self.evaluate(np.asarray(x, dtype=float))
        return np.stack([u + 0j, 1j * v], axis=1)


def _check_frequency(beta: float, omega: float):
    if not (beta > 0 and 0 < omega < beta):
        raise ValueError(f"need 0 < omega < beta, got omega={omega}, beta={beta}")


def hamiltonian(u, v, beta: float, omega: float):
    """``(u^4 + v^4)/4 + beta/2 (v^2 - u^2) + omega/2 (u^2 + v^2)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.25 * (u**4 + v**4) + 0.5 * beta * (v**2 - u**2) + 0.5 * omega * (u**2 + v**2)


def vector_field(s, beta, omega: float):
    """Right-hand side ``(u', v') = (-(omega + beta) v - v^3, (omega - beta) u + u^3)``.

    ``s`` is a :class:`PhaseState` or a ``(u, v)`` pair of scalars/arrays; ``beta``
    may be an array matching the samples (x-dependent mass).
    """
    u, v = (s.u, s.v) if isinstance(s, PhaseState) else s
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return -(omega + beta) * v - v**3, (omega - beta) * u + u**3


def level_curve(beta: float, omega: float, samples: int = 721):
    """The set ``{H = 0}`` in polar form, one closed lobe per sign of ``u``.

    On the ray at angle t, ``r^2 = 2 (beta cos 2t - omega) / (cos^4 t + sin^4 t)``
    wherever the right side is positive.
    """
    _check_frequency(beta, omega)
    half = 0.5 * np.arccos(omega / beta)
    t = np.linspace(-half, half, samples)
    r = np.sqrt(np.maximum(0.0, 2 * (beta * np.cos(2 * t) - omega) / (np.cos(t) ** 4 + np.sin(t) ** 4)))
    u, v = r * np.cos(t), r * np.sin(t)
    return [(u, v), (-u, -v)]


def _eigvecs(beta: float, omega: float):
    """Decaying (x -> +inf) and growing directions of the linearization at the origin."""
    kappa = np.sqrt(beta**2 - omega**2)
    es = np.array([omega + beta, kappa])
    eu = np.array([omega + beta, -kappa])
    return kappa, es / np.linalg.norm(es), eu / np.linalg.norm(eu)


def fit_decay_rate(x, amplitude) -> float:
    """Least-squares slope of ``-log|Phi|`` against ``|x|``."""
    x = np.abs(np.asarray(x, dtype=float))
    a = np.asarray(amplitude, dtype=float)
    keep = a > 0
    slope = np.polyfit(x[keep], np.log(a[keep]), 1)[0]
    return float(-slope)


def _fd4(f: np.ndarray, dx: float) -> np.ndarray:
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dx)


def angle_diagnostics(profile: WaveProfile, r_min: float = 1e-3) -> dict:
    """Monotonicity of ``theta = arctan(v/u)`` and agreement with ``(u^4+v^4)/(2 r^2)``.

    ``theta'`` is differentiated numerically (fourth-order differences) from the samples.
    """
    u, v, dx = profile.us, profile.vs, profile.dx
    theta = np.arctan2(v, u)
    r2 = u**2 + v**2
    mask = r2 > r_min**2
    dtheta = _fd4(theta, dx)
    inner = mask[2:-2] & mask[:-4] & mask[4:]
    formula = ((u**4 + v**4) / (2 * np.where(r2 > 0, r2, 1)))[2:-2]
    step_mask = mask[1:] & mask[:-1]
    return {
        "theta_increasing": bool(np.all(np.diff(theta)[step_mask] > 0)),
        "theta_rate_error": float(np.max(np.abs(dtheta - formula)[inner])) if inner.any() else 0.0,
    }


def swap_symmetry_defect(profile: WaveProfile, sign: float = 1.0) -> float:
    """``max |u(x) - sign * v(-x)| / max |Phi|`` on the symmetric grid."""
    scale = float(np.max(profile.amplitude))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(profile.us - sign * profile.vs[::-1])) / scale)


def _grid(x_max: float, dx: float) -> np.ndarray:
    n = int(round(x_max / dx))
    return dx * np.arange(-n, n + 1)


# ---------------------------------------------------------------------------
# constant mass


def homoclinic_orbit(
    beta: float,
    omega: float,
    x_max: float | None = None,
    tol: float = 1e-8,
    dx: float = 1e-3,
) -> WaveProfile:
    """Homoclinic orbit through ``(sqrt(2 (beta - omega)), 0)``.

    The orbit is integrated with DOP853 in both directions until ``|(u, v)|`` drops
    below ``max(tol, 1e-5)``.  Past that point the numerical orbit is replaced by its
    linear asymptote (the projection onto the stable / unstable eigendirection),
    because round-off in the growing direction would otherwise push the numerical
    solution off the origin.  The decay rate is fitted on the integrated part only.
    """
    _check_frequency(beta, omega)
    kappa, es, eu = _eigvecs(beta, omega)
    if x_max is None:
        x_max = np.log(10.0 / tol) / kappa
    if np.exp(-kappa * x_max) >= tol:
        raise ValueError(f"x_max={x_max} too short for tol={tol}: need exp(-kappa x_max) < tol")
    u0 = np.sqrt(2 * (beta - omega))
    stop = max(tol, SWITCH_RADIUS) * u0

    def rhs(_, y):
        return vector_field((y[0], y[1]), beta, omega)

    def small(_, y):
        return np.hypot(y[0], y[1]) - stop

    small.terminal = True
    small.direction = -1

    branches = {}
    for direction, keep in ((1, es), (-1, eu)):
        sol = solve_ivp(
            rhs, (0.0, direction * x_max), [u0, 0.0], method="DOP853",
            rtol=ODE_RTOL, atol=ODE_ATOL, events=small, dense_output=True,
        )
        if sol.status != 1:
            r_end = float(np.hypot(*sol.y[:, -1]))
            raise HomoclinicError(
                f"orbit did not decay below {stop:.1e} by x={direction * x_max:g} (|Phi|={r_end:.3e})"
            )
        x_sw = float(sol.t_events[0][0])
        y_sw = sol.y_events[0][0]
        # keep only the decaying component
        coef = np.linalg.solve(np.column_stack([es, eu]), y_sw)
        c = coef[0] if direction > 0 else coef[1]
        branches[direction] = (sol.sol, x_sw, c * keep)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        u = np.empty_like(x)
        v = np.empty_like(x)
        for direction, (dense, x_sw, tail) in branches.items():
            side = x >= 0 if direction > 0 else x < 0
            core = side & (direction * x <= direction * x_sw)
            if core.any():
                u[core], v[core] = dense(x[core])
            far = side & ~core
            decay = np.exp(-kappa * np.abs(x[far] - x_sw))
            u[far], v[far] = tail[0] * decay, tail[1] * decay
        return u, v

    xs = _grid(x_max, dx)
    us, vs = evaluate(xs)
    profile = WaveProfile(xs, us, vs, omega, f"constant(beta={beta:g})", evaluate=evaluate)

    peak = float(np.max(profile.amplitude))
    tail = float(max(profile.amplitude[0], profile.amplitude[-1]))
    if tail > tol * peak:
        raise HomoclinicError(f"tail {tail:.3e} above tol*max at x=+-{x_max:g}")

    rates = []
    for direction, (_, x_sw, _) in branches.items():
        a, b = sorted((direction * abs(x_sw) / 2, x_sw))
        sel = (xs >= a) & (xs <= b)
        rates.append(fit_decay_rate(xs[sel], profile.amplitude[sel]))
    H = hamiltonian(us, vs, beta, omega)
    profile.diagnostics.update(
        kappa=float(kappa),
        max_abs_H=float(np.max(np.abs(H))),
        decay_rate=float(np.mean(rates)),
        decay_rate_right=rates[0],
        decay_rate_left=rates[1],
        integrated_extent=[branches[-1][1], branches[1][1]],
        sector_holds=bool(np.all(us**2 > vs**2)),
        sector_margin=float(np.min((us**2 - vs**2) / (us**2 + vs**2))),
    )
    profile.diagnostics.update(angle_diagnostics(profile))
    return profile


# ---------------------------------------------------------------------------
# certificate


def stationary_residual(profile: WaveProfile, mass, omega: float | None = None) -> float:
    """Discrete L2 norm of ``(D + beta sigma3 - omega) Phi - G(Phi) Phi`` on the profile grid.

    Derivatives use fourth-order central differences; the two points at each end
    are dropped.
    """
    omega = profile.omega if omega is None else omega
    x, u, v, dx = profile.xs, profile.us, profile.vs, profile.dx
    if isinstance(mass, MassProfile):
        beta = mass(x)
    else:
        beta = np.broadcast_to(np.asarray(mass, dtype=float), x.shape)
    du, dv = _fd4(u, dx), _fd4(v, dx)
    uc, vc, bc = u[2:-2], v[2:-2], beta[2:-2]
    r1 = dv + (bc - omega) * uc - uc**3
    r2 = -du - (bc + omega) * vc - vc**3
    return float(np.sqrt(dx * np.sum(r1**2 + r2**2)))


# ---------------------------------------------------------------------------
# domain wall


def _wall_system(mass: MassProfile, omega: float):
    def rhs(x, y):
        b = mass(x)
        u, v = y[0], y[1]
        out = [-(omega + b) * v - v**3, (omega - b) * u + u**3]
        if len(y) == 4:
            du, dv = y[2], y[3]
            out += [(-(omega + b) - 3 * v * v) * dv, ((omega - b) + 3 * u * u) * du]
        return out

    return rhs


def _seed_direction(beta_end: float, omega: float, side: int):
    """Unit vector along which the linearization at ``x = side * X`` decays outward."""
    kappa = np.sqrt(beta_end**2 - omega**2)
    e = np.array([omega + beta_end, side * kappa])
    e /= np.linalg.norm(e)
    return e if e.sum() >= 0 else -e


def domain_wall_wave(
    mass: MassProfile,
    omega: float,
    x_max: float | None = None,
    tol: float = 1e-10,
    dx: float = 1e-3,
    gap_eigenvalues=None,
    max_iter: int = 50,
) -> WaveProfile:
    """Standing wave for a domain-wall mass by two-sided shooting.

    At ``x = +-x_max`` the solution is seeded as ``s_pm exp(-kappa x_max) e_pm`` along
    the outward-decaying eigendirection of the asymptotic linearization.  Both halves
    are integrated to ``x = 0`` and Newton's method (Jacobian from the variational
    equations) drives the mismatch below ``tol``.  The starting pair ``(s_+, s_-)`` is
    the best match on a logarithmic scan; the solver imposes no symmetry.
    """
    if mass.is_constant or not mass.smooth:
        raise ValueError("domain_wall_wave needs a smooth domain-wall mass")
    binf = mass.beta_inf
    _check_frequency(binf, omega)
    if gap_eigenvalues is None:
        from .spectral import assemble, gap_eigenvalues as _gap

        A = assemble(mass, 0.05, max(30.0, 15 * mass.length_scale))
        gap_eigenvalues = [e.value for e in _gap(A, margin=0.5)]
    for lam in gap_eigenvalues:
        if abs(omega - lam) < 1e-3:
            raise ValueError(f"omega={omega} is within 1e-3 of the gap eigenvalue {lam}")

    kappa = np.sqrt(binf**2 - omega**2)
    if x_max is None:
        x_max = float(np.ceil(np.log(1e9) / kappa))
    scale = np.exp(-kappa * x_max)
    rhs = _wall_system(mass, omega)
    dirs = {side: _seed_direction(float(mass(side * x_max)), omega, side) for side in (1, -1)}

    def shoot(side, s, tangent=True, dense=False):
        e = dirs[side] * scale
        y0 = np.concatenate([s * e, e]) if tangent else s * e
        sol = solve_ivp(
            rhs, (side * x_max, 0.0), y0, method="DOP853",
            rtol=1e-12, atol=1e-22, dense_output=dense,
        )
        if not sol.success:
            raise ShootingError(f"integration from x={side * x_max:g} failed: {sol.message}", np.inf)
        return sol

    # scan: the ODE is odd in (u, v), so R(-s) = -R(s)
    grid = np.logspace(-2, 3, 51)
    ends = {side: np.array([shoot(side, s, tangent=False).y[:, -1] for s in grid]) for side in (1, -1)}
    signed = np.concatenate([-grid[::-1], grid])
    R = np.concatenate([-ends[1][::-1], ends[1]])
    Lft = np.concatenate([-ends[-1][::-1], ends[-1]])
    diff = np.linalg.norm(R[:, None, :] - Lft[None, :, :], axis=2)
    size = np.linalg.norm(R, axis=1)[:, None] + np.linalg.norm(Lft, axis=1)[None, :]
    rel = np.where(size > 1e-3, diff / np.where(size > 0, size, 1), np.inf)
    i, j = np.unravel_index(np.argmin(rel), rel.shape)
    s = np.array([signed[i], signed[j]])

    def defect(s):
        a, b = shoot(1, s[0]).y[:, -1], shoot(-1, s[1]).y[:, -1]
        F = a[:2] - b[:2]
        J = np.column_stack([a[2:], -b[2:]])
        return F, J

    F, J = defect(s)
    it = 0
    while np.linalg.norm(F) >= tol:
        if it >= max_iter:
            raise ShootingError(f"Newton did not converge in {max_iter} iterations", float(np.linalg.norm(F)))
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while True:
            F_new, J_new = defect(s + lam * step)
            if np.linalg.norm(F_new) < np.linalg.norm(F) or lam < 1e-3:
                break
            lam *= 0.5
        s, F, J = s + lam * step, F_new, J_new
        it += 1

    sols = {side: shoot(side, s[k], tangent=False, dense=True) for k, side in enumerate((1, -1))}
    tails = {side: dirs[side] * s[k] * scale for k, side in enumerate((1, -1))}

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        u = np.empty_like(x)
        v = np.empty_like(x)
        for side, sol in sols.items():
            sel = (x >= 0) if side > 0 else (x < 0)
            core = sel & (np.abs(x) <= x_max)
            if core.any():
                u[core], v[core] = sol.sol(x[core])
            far = sel & ~core
            decay = np.exp(-kappa * (np.abs(x[far]) - x_max))
            u[far], v[far] = tails[side][0] * decay, tails[side][1] * decay
        return u, v

    xs = _grid(x_max, dx)
    us, vs = evaluate(xs)
    profile = WaveProfile(xs, us, vs, omega, mass.id, evaluate=evaluate)
    amp = profile.amplitude
    right = (xs >= x_max / 2)
    left = (xs <= -x_max / 2)
    rates = [fit_decay_rate(xs[right], amp[right]), fit_decay_rate(xs[left], amp[left])]
    profile.diagnostics.update(
        kappa=float(kappa),
        matching_defect=float(np.linalg.norm(F)),
        newton_iterations=it,
        shooting_amplitudes=[float(s[0]), float(s[1])],
        decay_rate=float(np.mean(rates)),
        decay_rate_right=rates[0],
        decay_rate_left=rates[1],
        tail_ratio=float(max(amp[0], amp[-1]) / np.max(amp)),
        swap_symmetry_defect=swap_symmetry_defect(profile, 1.0),
        odd_swap_symmetry_defect=swap_symmetry_defect(profile, -1.0),
        gap_eigenvalues=[float(l) for l in gap_eigenvalues],
    )
    return profile
