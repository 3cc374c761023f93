"""Lattice functions on hZ: discretization, interpolation, difference operators, norms.

A :class:`LatticeField` stores the samples of a (possibly spinor-valued) function on
a finite window of the lattice ``x_n = n h``.  Every site outside the window is zero,
so operators that reach across the window edge simply see zeros there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "LatticeField",
    "LatticeSpectrum",
    "discretize",
    "interp_linear",
    "interp_constant",
    "forward_diff",
    "backward_diff",
    "dirac_discrete",
    "inner",
    "l2h_norm",
    "h1h_norm",
    "h1h_norm_fourier",
    "linf_norm",
    "lattice_fourier",
    "lattice_fourier_inv",
    "window_for",
]

# 5-point Gauss-Legendre rule on [0, 1]; exact through degree 9.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


@dataclass(frozen=True)
class LatticeField:
    """Samples ``values[j]`` at sites ``n = origin + j`` of the lattice hZ.

    ``values`` has shape ``(N,)`` for scalar fields and ``(N, 2)`` for spinors.
    """

    h: float
    origin: int
    values: np.ndarray

    def __post_init__(self):
        if not (self.h > 0 and np.isfinite(self.h)):
            raise ValueError(f"lattice spacing must be positive, got {self.h}")
        vals = np.array(self.values)
        if vals.ndim not in (1, 2) or vals.shape[0] == 0:
            raise ValueError("values must be a nonempty (N,) or (N, k) array")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", int(self.origin))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.origin, self.origin + self.size)

    @property
    def x(self) -> np.ndarray:
        return self.n * self.h

    @property
    def last(self) -> int:
        return self.origin + self.size - 1

    def with_values(self, values, origin: int | None = None) -> "LatticeField":
        return LatticeField(self.h, self.origin if origin is None else origin, values)

    def take(self, lo: int, hi: int) -> np.ndarray:
        """Values on sites ``lo..hi`` inclusive, zero-filled outside the window."""
        out = np.zeros((hi - lo + 1,) + self.values.shape[1:], dtype=self.values.dtype)
        a, b = max(lo, self.origin), min(hi, self.last)
        if a <= b:
            out[a - lo : b - lo + 1] = self.values[a - self.origin : b - self.origin + 1]
        return out

    def padded(self, lo: int, hi: int) -> "LatticeField":
        return LatticeField(self.h, lo, self.take(lo, hi))

    @classmethod
    def zeros(cls, h: float, lo: int, hi: int, spinor: bool = True) -> "LatticeField":
        shape = (hi - lo + 1, 2) if spinor else (hi - lo + 1,)
        return cls(h, lo, np.zeros(shape, dtype=complex))


@dataclass(frozen=True)
class LatticeSpectrum:
    """Samples of the lattice Fourier transform at ``xi_k = -pi + 2 pi k / N``.

    ``origin`` records the index of the first site of the field it came from; the
    phase ``exp(-i n xi)`` uses absolute site indices.
    """

    h: float
    origin: int
    xi: np.ndarray
    coeffs: np.ndarray


def window_for(half_width: float, h: float) -> tuple[int, int]:
    """Index range ``(lo, hi)`` covering ``[-half_width, half_width]``."""
    m = int(np.ceil(half_width / h - 1e-9))
    return -m, m


def discretize(f: Callable, h: float, lo: int, hi: int, offset: float = 0.0) -> LatticeField:
    """Cell averages ``(1/h) * int_{x_n}^{x_{n+1}} f`` for ``n = lo..hi``.

    ``f`` must accept an array of points and return an array of shape ``(M,)`` or
    ``(M, k)``.  ``offset`` shifts every cell to ``[x_n + offset, x_{n+1} + offset]``.
    """
    if hi < lo:
        raise ValueError("empty window")
    left = np.arange(lo, hi + 1) * h + offset
    pts = left[:, None] + h * _GL_NODES[None, :]
    samples = np.asarray(f(pts.ravel()))
    if not np.all(np.isfinite(samples)):
        raise ValueError("function returned non-finite samples")
    samples = samples.reshape(pts.shape + samples.shape[1:])
    w = _GL_WEIGHTS.reshape((1, -1) + (1,) * (samples.ndim - 2))
    return LatticeField(h, lo, np.sum(samples * w, axis=1))


def _locate(u: LatticeField, x):
    x = np.asarray(x, dtype=float)
    n = np.floor(x / u.h + 1e-12).astype(np.int64)
    # nodes land exactly on their own cell
    return x, n


def interp_linear(u: LatticeField) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-linear interpolant ``u(x_n) + (d_h u)(x_n) (x - x_n)`` on each cell."""
    h, lo, hi = u.h, u.origin - 1, u.last + 1
    padded = u.take(lo, hi)

    def p(x):
        x, n = _locate(u, x)
        inside = (n >= lo) & (n < hi)
        j = np.clip(n - lo, 0, hi - lo - 1)
        t = (x - n * h) / h
        t = t.reshape(t.shape + (1,) * (padded.ndim - 1))
        out = (1 - t) * padded[j] + t * padded[j + 1]
        return np.where(inside.reshape(inside.shape + (1,) * (padded.ndim - 1)), out, 0)

    return p


def interp_constant(u: LatticeField) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-constant interpolant: ``u(x_n)`` on ``[x_n, x_{n+1})``."""

    def q(x):
        x, n = _locate(u, x)
        inside = (n >= u.origin) & (n <= u.last)
        j = np.clip(n - u.origin, 0, u.size - 1)
        out = u.values[j]
        return np.where(inside.reshape(inside.shape + (1,) * (u.values.ndim - 1)), out, 0)

    return q


def forward_diff(u: LatticeField) -> LatticeField:
    """``(d_h u)(x_n) = (u(x_{n+1}) - u(x_n)) / h`` on the window grown one site left."""
    p = u.take(u.origin - 1, u.last + 1)
    return LatticeField(u.h, u.origin - 1, (p[1:] - p[:-1]) / u.h)


def backward_diff(u: LatticeField) -> LatticeField:
    """``(d*_h u)(x_n) = (u(x_n) - u(x_{n-1})) / h`` on the window grown one site right."""
    p = u.take(u.origin - 1, u.last + 1)
    return LatticeField(u.h, u.origin, (p[1:] - p[:-1]) / u.h)


def dirac_discrete(u: LatticeField) -> LatticeField:
    """Discrete Dirac operator: ``(-i d_h u2, -i d*_h u1)``.

    The result lives on the window grown by one site on each side.
    """
    if u.values.ndim != 2 or u.values.shape[1] != 2:
        raise ValueError("dirac_discrete needs a spinor field")
    lo, hi = u.origin - 1, u.last + 1
    p = u.take(lo - 1, hi + 1)
    out = np.empty((hi - lo + 1, 2), dtype=complex)
    out[:, 0] = -1j * (p[2:, 1] - p[1:-1, 1]) / u.h
    out[:, 1] = -1j * (p[1:-1, 0] - p[:-2, 0]) / u.h
    return LatticeField(u.h, lo, out)


def inner(u: LatticeField, v: LatticeField) -> complex:
    """``<u, v> = h * sum conj(u) v`` over the union of both windows."""
    if not np.isclose(u.h, v.h, rtol=1e-14, atol=0):
        raise ValueError("fields live on different lattices")
    lo, hi = min(u.origin, v.origin), max(u.last, v.last)
    return complex(u.h * np.sum(np.conj(u.take(lo, hi)) * v.take(lo, hi)))


def l2h_norm(u: LatticeField) -> float:
    return float(np.sqrt(u.h * np.sum(np.abs(u.values) ** 2)))


def h1h_norm(u: LatticeField) -> float:
    """Sequence form: ``||u||^2 + ||d_h u||^2`` in L^2_h."""
    return float(np.hypot(l2h_norm(u), l2h_norm(forward_diff(u))))


def linf_norm(u: LatticeField) -> float:
    v = u.values if u.values.ndim == 1 else np.linalg.norm(u.values, axis=1)
    return float(np.max(np.abs(v)))


def _sobolev_toeplitz(size: int, h: float) -> np.ndarray:
    # (1/2pi) int_{-pi}^{pi} (1 + xi^2/h^2) exp(-i k xi) dxi, scaled by 2 pi h
    k = np.arange(size)
    col = np.empty(size)
    col[0] = 1.0 + np.pi**2 / (3.0 * h**2)
    col[1:] = 2.0 * (-1.0) ** k[1:] / (k[1:] ** 2 * h**2)
    idx = np.abs(k[:, None] - k[None, :])
    return h * col[idx]


def h1h_norm_fourier(u: LatticeField) -> float:
    """Fourier form ``h * int_{-pi}^{pi} (1 + xi^2/h^2) |u^(xi)|^2 dxi``, evaluated exactly.

    The weight integrated against ``exp(-i (m-n) xi)`` has a closed form, so the norm
    is the quadratic form of a Toeplitz matrix in the site values.
    """
    T = _sobolev_toeplitz(u.size, u.h)
    vals = u.values.reshape(u.size, -1)
    total = sum(np.real(np.conj(c) @ T @ c) for c in vals.T)
    return float(np.sqrt(max(total, 0.0)))


def lattice_fourier(u: LatticeField) -> LatticeSpectrum:
    """``u^(xi_k) = (2 pi)^{-1/2} sum_n u(x_n) exp(-i n xi_k)`` on N equispaced ``xi_k``."""
    N = u.size
    xi = -np.pi + 2.0 * np.pi * np.arange(N) / N
    phase = np.exp(-1j * np.outer(xi, u.n))
    coeffs = phase @ u.values.reshape(N, -1) / np.sqrt(2.0 * np.pi)
    return LatticeSpectrum(u.h, u.origin, xi, coeffs.reshape((N,) + u.values.shape[1:]))


def lattice_fourier_inv(S: LatticeSpectrum, size: int | None = None) -> LatticeField:
    """Inversion formula with the rectangle rule on the ``xi_k`` grid (exact on the window)."""
    N = len(S.xi)
    if size is not None and size != N:
        raise ValueError(f"spectrum has {N} samples but target window has {size} sites")
    if S.coeffs.shape[0] != N:
        raise ValueError("coefficient count does not match frequency grid")
    n = np.arange(S.origin, S.origin + N)
    dxi = 2.0 * np.pi / N
    phase = np.exp(1j * np.outer(n, S.xi))
    vals = phase @ S.coeffs.reshape(N, -1) * dxi / np.sqrt(2.0 * np.pi)
    return LatticeField(S.h, S.origin, vals.reshape((N,) + S.coeffs.shape[1:]))
