"""Discrete-to-continuum refinement studies.

For each lattice spacing on a ladder the datum (and a domain-wall mass) is
discretized by cell averages, evolved with the discrete Dirac system, interpolated
piecewise linearly and compared against a well-resolved continuum solution.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .continuum import ContinuumField, evolve_continuum
from .discrete import (
    bihari_horizon,
    calibrate_bihari_constant,
    evolve_discrete,
    default_dz,
)
from .errors import HorizonError, NumericalError
from .lattice import (
    LatticeField,
    dirac_discrete,
    discretize,
    forward_diff,
    h1h_norm,
    interp_linear,
    l2h_norm,
    window_for,
)
from .mass import MassProfile, discretize_mass

__all__ = [
    "StudyConfig",
    "ConvergenceRow",
    "ConvergenceReport",
    "compare_fields",
    "fit_rate",
    "run_study",
    "operator_convergence",
    "mass_interpolation_errors",
    "gaussian_datum",
    "max_workers",
]


def max_workers() -> int:
    env = os.environ.get("BWA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def gaussian_datum(x):
    """The spinor ``(exp(-x^2), 0)``."""
    x = np.asarray(x, dtype=float)
    return np.stack([np.exp(-x * x) + 0j, np.zeros_like(x, dtype=complex)], axis=-1)


def fit_rate(hs, errors) -> float:
    """Least-squares slope of ``log error`` against ``log h``."""
    hs = np.asarray(hs, dtype=float)
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        return float("nan")
    return float(np.polyfit(np.log(hs), np.log(e), 1)[0])


def compare_fields(psi_h: LatticeField, Psi: ContinuumField) -> tuple[float, float]:
    """L2 and H1 norms of ``p_h psi_h - Psi`` over the shared window.

    The shared window is the stretch between the first and last stored lattice node
    that lies inside the periodic box; integrals use the continuum grid.
    """
    a, b = psi_h.origin * psi_h.h, psi_h.last * psi_h.h
    lo, hi = max(a, -Psi.L), min(b, Psi.L)
    if not lo < hi:
        raise ValueError("lattice window and continuum box do not overlap")
    x = Psi.x
    sel = (x >= lo) & (x <= hi)
    p = interp_linear(psi_h)(x[sel])
    diff = p - Psi.values[sel]
    # slope of p_h psi_h on the cell containing x
    d = forward_diff(psi_h)
    n = np.floor(x[sel] / psi_h.h + 1e-12).astype(np.int64)
    slopes = d.take(int(n.min()), int(n.max()))[n - n.min()]
    ddiff = slopes - Psi.derivative()[sel]
    l2 = float(np.sqrt(Psi.dx * np.sum(np.abs(diff) ** 2)))
    dl2 = float(np.sqrt(Psi.dx * np.sum(np.abs(ddiff) ** 2)))
    return l2, float(np.hypot(l2, dl2))


@dataclass
class StudyConfig:
    """Numerical parameters of a refinement study.

    ``lattice_half_width``: the lattice window is ``[-W, W]``.
    ``box_half_width``/``reference_N``/``reference_dz``: continuum reference grid;
    ``reference_N = None`` picks the smallest power of two with ``dx <= h_min / 4``.
    ``C``: a-priori constant; ``None`` calibrates it on a burn-in of length ``burn_in``.
    """

    lattice_half_width: float = 12.0
    box_half_width: float = 20.0
    reference_N: int | None = None
    reference_dz: float = 1e-3
    reference_tolerance: float = 0.1
    C: float | None = None
    burn_in: float = 0.05
    dz: float | None = None
    parallel: bool = True


@dataclass
class ConvergenceRow:
    h: float
    l2: float
    h1: float
    seconds: float
    C: float = float("nan")
    T_max: float = float("nan")

    def to_dict(self, timings: bool = False) -> dict:
        return {"h": self.h, "l2": self.l2, "h1": self.h1, "seconds": self.seconds if timings else None}


@dataclass
class ConvergenceReport:
    datum_id: str
    mass_id: str
    T: float
    rows: list = field(default_factory=list)
    fitted_rate: float = float("nan")
    reference_error: float = float("nan")

    @property
    def hs(self) -> list:
        return [r.h for r in self.rows]

    @property
    def l2_errors(self) -> list:
        return [r.l2 for r in self.rows]

    def ratios(self) -> list:
        e = self.l2_errors
        return [e[i] / e[i + 1] if e[i + 1] > 0 else float("inf") for i in range(len(e) - 1)]

    def strictly_decreasing(self) -> bool:
        e = self.l2_errors
        return all(e[i + 1] < e[i] for i in range(len(e) - 1))

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "datum": self.datum_id,
            "mass": self.mass_id,
            "T": self.T,
            "rows": [r.to_dict(timings) for r in self.rows],
            "rate": self.fitted_rate,
        }


def _reference(chi: Callable, mass, T: float, h_min: float, cfg: StudyConfig):
    L = cfg.box_half_width
    N = cfg.reference_N
    if N is None:
        N = 8
        while 2 * L / N > h_min / 4:
            N *= 2
    field0 = ContinuumField.from_function(chi, L, N)
    coarse = evolve_continuum(field0, mass, T, cfg.reference_dz).final
    fine = evolve_continuum(field0, mass, T, cfg.reference_dz / 2).final
    err = float(np.sqrt(fine.dx * np.sum(np.abs(fine.values - coarse.values) ** 2)))
    return fine, err


def _rung(chi, mass, T, h, cfg: StudyConfig, reference: ContinuumField):
    t0 = time.perf_counter()
    lo, hi = window_for(cfg.lattice_half_width, h)
    chi_h = discretize(chi, h, lo, hi)
    beta = mass if mass.is_constant else discretize_mass(mass, h, lo, hi)
    dz = cfg.dz or default_dz(h)
    burn = min(cfg.burn_in, T)
    burn_zs = list(np.linspace(0.0, burn, 11)[1:])
    traj = evolve_discrete(chi_h, beta, T, dz, snapshot_zs=burn_zs)
    M = h1h_norm(chi_h)
    if M == 0:
        C, T_max = float("nan"), float("inf")
    else:
        k = len(burn_zs) + 1
        C = cfg.C if cfg.C is not None else calibrate_bihari_constant(traj.zs[:k], traj.h1h[:k])
        T_max, _ = bihari_horizon(M, C)
        if T >= T_max:
            raise HorizonError(f"T={T} beyond the a-priori horizon {T_max:.4g} at h={h} (C={C:.3g})")
    l2, h1 = compare_fields(traj.final, reference)
    return ConvergenceRow(h, l2, h1, time.perf_counter() - t0, C, T_max)


def run_study(
    chi: Callable,
    mass: MassProfile,
    T: float,
    h_ladder: Sequence[float],
    config: StudyConfig | None = None,
    datum_id: str = "gaussian",
) -> ConvergenceReport:
    """Discrete-to-continuum study; rows are ordered by decreasing ``h``."""
    cfg = config or StudyConfig()
    hs = [float(h) for h in h_ladder]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("h ladder must be strictly decreasing")
    if not T > 0:
        raise ValueError("T must be positive")
    if not mass.smooth:
        raise ValueError("the sign mass is not admitted in dynamics")

    reference, ref_err = _reference(chi, mass, T, hs[-1], cfg)

    def job(h):
        try:
            return _rung(chi, mass, T, h, cfg, reference)
        except NumericalError as exc:
            exc.args = (f"{exc} [h={h}]",)
            raise

    if cfg.parallel and max_workers() > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers(), len(hs))) as pool:
            rows = list(pool.map(job, hs))
    else:
        rows = [job(h) for h in hs]

    report = ConvergenceReport(datum_id, mass.id, float(T), rows, reference_error=ref_err)
    report.fitted_rate = fit_rate(hs, report.l2_errors)
    coarse = rows[0].l2
    if coarse > 0 and ref_err > cfg.reference_tolerance * coarse:
        raise NumericalError(
            f"reference self-convergence error {ref_err:.2e} exceeds "
            f"{cfg.reference_tolerance:g} x coarsest lattice error {coarse:.2e}"
        )
    return report


def operator_convergence(phi: Callable, dphi: Callable, hs: Sequence[float], half_width: float = 8.0):
    """``||D_h phi_h - (D phi)_h||_{L2_h}`` along a ladder, with the fitted rate.

    ``dphi`` is the exact x-derivative of the spinor ``phi``; ``D phi = -i sigma1 phi'``.
    """

    def Dphi(x):
        d = np.asarray(dphi(x))
        return -1j * d[..., ::-1]

    errs = []
    for h in hs:
        lo, hi = window_for(half_width, h)
        approx = dirac_discrete(discretize(phi, h, lo, hi))
        exact = discretize(Dphi, h, approx.origin, approx.last)
        errs.append(l2h_norm(approx.with_values(approx.values - exact.values)))
    return errs, fit_rate(hs, errs)


def mass_interpolation_errors(profile: MassProfile, hs: Sequence[float], half_width: float = 20.0, samples: int = 200_001):
    """``||p_h beta_h - beta||_{L2(-W, W)}`` for each ``h`` (trapezoid rule on a fine grid)."""
    x = np.linspace(-half_width, half_width, samples)
    out = []
    for h in hs:
        lo, hi = window_for(half_width + 2 * h, h)
        bh = discretize_mass(profile, h, lo, hi)
        d = interp_linear(bh)(x) - profile(x)
        out.append(float(np.sqrt(trapezoid(d * d, x))))
    return out
