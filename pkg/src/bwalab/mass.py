"""Mass profiles: constant masses and odd domain walls."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MassProfileError
from .lattice import LatticeField, discretize

__all__ = ["MassProfile", "ValidationReport", "validate", "discretize_mass", "sample"]


@dataclass(frozen=True)
class MassProfile:
    """Either ``beta(x) = beta`` (kind ``"constant"``) or a domain wall.

    Built-in wall shapes are ``"tanh"`` (``beta_inf * tanh(x / length_scale)``) and
    ``"sign"`` (``beta_inf * sign(x)``, a discontinuous reference used only by the
    spectral module).  Arbitrary walls can be wrapped with :meth:`from_function`.
    """

    kind: str
    beta: float
    length_scale: float = 1.0
    shape: str = "tanh"
    func: Callable | None = field(default=None, compare=False, repr=False)
    label: str | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "domain_wall"):
            raise ValueError(f"unknown mass kind {self.kind!r}")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise ValueError("mass value must be positive and finite")
        if self.kind == "domain_wall":
            if self.shape not in ("tanh", "sign", "custom"):
                raise ValueError(f"unknown domain wall shape {self.shape!r}")
            if self.shape == "custom" and self.func is None:
                raise ValueError("custom wall needs a function")
            if not self.length_scale > 0:
                raise ValueError("length_scale must be positive")

    @classmethod
    def constant(cls, beta: float) -> "MassProfile":
        return cls("constant", float(beta))

    @classmethod
    def domain_wall(cls, beta_inf: float = 1.0, length_scale: float = 1.0, shape: str = "tanh"):
        return cls("domain_wall", float(beta_inf), float(length_scale), shape)

    @classmethod
    def from_function(cls, func: Callable, beta_inf: float, label: str = "custom"):
        return cls("domain_wall", float(beta_inf), 1.0, "custom", func, label)

    @property
    def beta_inf(self) -> float:
        return self.beta

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def smooth(self) -> bool:
        return not (self.kind == "domain_wall" and self.shape == "sign")

    @property
    def id(self) -> str:
        if self.is_constant:
            return f"constant(beta={self.beta:g})"
        if self.shape == "custom":
            return self.label or "custom"
        return f"{self.shape}(beta_inf={self.beta:g}, l={self.length_scale:g})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            return np.full_like(x, self.beta)
        if self.shape == "tanh":
            return self.beta * np.tanh(x / self.length_scale)
        if self.shape == "sign":
            return self.beta * np.sign(x)
        return np.asarray(self.func(x), dtype=float)

    def to_dict(self) -> dict:
        if self.is_constant:
            return {"kind": "constant", "beta": self.beta}
        if self.shape == "custom":
            raise ValueError("custom profiles cannot be serialized")
        d = {"kind": "domain_wall", "beta_inf": self.beta, "length_scale": self.length_scale}
        if self.shape != "tanh":
            d["shape"] = self.shape
        return d


def sample(profile: MassProfile, x):
    return profile(x)


@dataclass
class ValidationReport:
    profile_id: str
    checks: list = field(default_factory=list)  # (name, passed, defect)

    @property
    def ok(self) -> bool:
        return all(p for _, p, _ in self.checks)

    @property
    def failures(self) -> list:
        return [(n, d) for n, p, d in self.checks if not p]

    def defect(self, name: str) -> float:
        return next(d for n, _, d in self.checks if n == name)

    def raise_for_failures(self):
        for name, defect in self.failures:
            raise MassProfileError(name, defect)


def validate(profile: MassProfile, grid=None) -> ValidationReport:
    """Check the domain-wall properties on a symmetric sampling grid.

    Properties: ``odd``, ``nondecreasing``, ``bounded_derivative``, ``limits``
    (approach of +-beta_inf at the grid ends) and ``tail_integrable`` (the partial
    integrals of ``|beta - beta_inf|`` settle to 1e-8 by ``X = 50``).
    """
    report = ValidationReport(profile.id)
    if profile.is_constant:
        report.checks.append(("positive", profile.beta > 0, max(0.0, -profile.beta)))
        return report

    if grid is None:
        grid = np.linspace(-50.0, 50.0, 10_001)
    x = np.asarray(grid, dtype=float)
    if not np.allclose(x, -x[::-1], atol=1e-12):
        raise ValueError("validation grid must be symmetric about 0")
    b = profile(x)
    binf = profile.beta_inf

    odd = float(np.max(np.abs(b + b[::-1])))
    report.checks.append(("odd", odd <= 1e-12 * binf, odd))

    drops = np.diff(b)
    worst_drop = float(max(0.0, -np.min(drops)))
    report.checks.append(("nondecreasing", worst_drop <= 1e-14 * binf, worst_drop))

    # one-sided slopes on a fine grid around every sample; a jump shows up as ~1/eps
    eps = 1e-6
    slope = np.max(np.abs(profile(x + eps) - profile(x - eps))) / (2 * eps)
    report.checks.append(("bounded_derivative", bool(slope < 1e3 * binf), float(slope)))

    lim = float(max(abs(b[-1] - binf), abs(b[0] + binf)))
    report.checks.append(("limits", lim <= 1e-6 * binf, lim))

    X = float(x[-1])
    xs = np.linspace(0.0, X, 20_001)
    tail = np.abs(profile(xs) - binf) + np.abs(profile(-xs) + binf)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (tail[1:] + tail[:-1]) * np.diff(xs))])
    cauchy = float(cum[-1] - cum[len(xs) // 2])
    report.checks.append(("tail_integrable", cauchy <= 1e-8, cauchy))
    return report


def discretize_mass(profile: MassProfile, h: float, lo: int, hi: int, offset: float = 0.0) -> LatticeField:
    """Cell averages of ``beta`` on sites ``lo..hi`` (real scalar field)."""
    field_ = discretize(profile, h, lo, hi, offset=offset)
    return field_.with_values(np.real(field_.values))
