"""Minimal standalone SVG plots.

Written by hand instead of through a plotting library so that the output depends on
nothing but the data: coordinates are printed with fixed precision and no
timestamps or ids are embedded.
"""
from __future__ import annotations

import math
from html import escape

import numpy as np

from .io import write_atomic

__all__ = ["emit_svg", "PLOT_KINDS"]

PLOT_KINDS = ("phase_plane", "error_loglog", "profile", "spectrum_ladder")

WIDTH, HEIGHT = 640, 480
MARGIN = dict(left=70, right=20, top=40, bottom=70)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _tick_label(t: float, log: bool) -> str:
    if log:
        return f"1e{int(round(t))}"
    return f"{t:.6g}"


class _Canvas:
    def __init__(self, xlim, ylim, xlabel, ylabel, title, caption, logx=False, logy=False):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.logx, self.logy = logx, logy
        self.parts = []
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        self._axes(xlabel, ylabel, title, caption)

    def px(self, x):
        return MARGIN["left"] + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN["top"] + (self.y1 - np.asarray(y, dtype=float)) / (self.y1 - self.y0) * self.ph

    def _axes(self, xlabel, ylabel, title, caption):
        L, T = MARGIN["left"], MARGIN["top"]
        p = self.parts
        p.append(f'<rect x="{L}" y="{T}" width="{self.pw}" height="{self.ph}" fill="none" stroke="#000"/>')
        for t in _nice_ticks(self.x0, self.x1):
            X = _f(float(self.px(t)))
            p.append(f'<line x1="{X}" y1="{T + self.ph}" x2="{X}" y2="{T + self.ph + 5}" stroke="#000"/>')
            p.append(f'<text x="{X}" y="{T + self.ph + 18}" text-anchor="middle" font-size="11">{_tick_label(t, self.logx)}</text>')
        for t in _nice_ticks(self.y0, self.y1):
            Y = _f(float(self.py(t)))
            p.append(f'<line x1="{L - 5}" y1="{Y}" x2="{L}" y2="{Y}" stroke="#000"/>')
            p.append(f'<text x="{L - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle" font-size="11">{_tick_label(t, self.logy)}</text>')
        p.append(f'<text x="{L + self.pw / 2:.1f}" y="{T + self.ph + 38}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>')
        p.append(
            f'<text x="18" y="{T + self.ph / 2:.1f}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 18 {T + self.ph / 2:.1f})">{escape(ylabel)}</text>'
        )
        p.append(f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
        p.append(f'<text x="{L}" y="{HEIGHT - 12}" font-size="11" fill="#444">{escape(caption)}</text>')

    def polyline(self, x, y, color, width=1.5, dash=None):
        X, Y = self.px(x), self.py(y)
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(X, Y))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')

    def markers(self, x, y, color, r=4):
        for a, b in zip(self.px(x), self.py(y)):
            self.parts.append(f'<circle cx="{_f(a)}" cy="{_f(b)}" r="{r}" fill="{color}"/>')

    def hline(self, y, color="#888", dash="4,3"):
        Y = _f(float(self.py(y)))
        self.parts.append(
            f'<line x1="{MARGIN["left"]}" y1="{Y}" x2="{MARGIN["left"] + self.pw}" y2="{Y}" stroke="{color}" stroke-dasharray="{dash}"/>'
        )

    def legend(self, entries):
        x = MARGIN["left"] + 10
        for i, (label, color) in enumerate(entries):
            y = MARGIN["top"] + 16 + 16 * i
            self.parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{color}" stroke-width="2"/>')
            self.parts.append(f'<text x="{x + 26}" y="{y + 4}" font-size="11">{escape(label)}</text>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">'
        )
        body = "\n".join(self.parts)
        return f'<?xml version="1.0" encoding="UTF-8"?>\n{head}\n<rect width="100%" height="100%" fill="#fff"/>\n{body}\n</svg>\n'


def _limits(arrays, pad=0.05):
    vals = np.concatenate([np.ravel(np.asarray(a, dtype=float)) for a in arrays])
    vals = vals[np.isfinite(vals)]
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    d = (hi - lo) * pad
    return lo - d, hi + d


def _phase_plane(data, caption):
    orbit_u, orbit_v = (np.asarray(a, dtype=float) for a in data["orbit"])
    curves = [tuple(np.asarray(a, dtype=float) for a in c) for c in data.get("level_curves", [])]
    xs = [orbit_u] + [c[0] for c in curves]
    ys = [orbit_v] + [c[1] for c in curves]
    cv = _Canvas(_limits(xs), _limits(ys), "u", "v", "Phase plane", caption)
    for cu, cvv in curves:
        cv.polyline(cu, cvv, "#888", 1.0, "5,3")
    cv.polyline(orbit_u, orbit_v, COLORS[0], 2.0)
    cv.legend([("orbit", COLORS[0])] + ([("H = 0", "#888")] if curves else []))
    return cv


def _error_loglog(data, caption):
    h = np.asarray(data["h"], dtype=float)
    e = np.asarray(data["error"], dtype=float)
    if np.any(h <= 0) or np.any(e <= 0):
        raise ValueError("log-log plot needs positive h and errors")
    lh, le = np.log10(h), np.log10(e)
    cv = _Canvas(_limits([lh]), _limits([le]), "log10 h", "log10 L2 error", "Refinement study", caption, True, True)
    rate = data.get("rate")
    if rate is not None and math.isfinite(rate):
        c = float(np.mean(le - rate * lh))
        fx = np.array([lh.min(), lh.max()])
        cv.polyline(fx, c + rate * fx, COLORS[1], 1.2, "6,3")
    cv.markers(lh, le, COLORS[0])
    cv.legend([("L2 error", COLORS[0])] + ([(f"fit, rate {rate:.3f}", COLORS[1])] if rate is not None and math.isfinite(rate) else []))
    return cv


def _profile(data, caption):
    x = np.asarray(data["x"], dtype=float)
    series = {k: np.asarray(v, dtype=float) for k, v in data["series"].items()}
    if not series:
        raise ValueError("profile plot needs at least one series")
    cv = _Canvas(_limits([x], 0.0), _limits(list(series.values())), data.get("xlabel", "x"), data.get("ylabel", "value"), "Profile", caption)
    entries = []
    for i, (name, y) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        cv.polyline(x, y, color)
        entries.append((name, color))
    cv.legend(entries)
    return cv


def _spectrum_ladder(data, caption):
    eigs = np.asarray(data.get("eigs", []), dtype=float)
    gap = data.get("gap")
    ref = [eigs] + ([np.asarray(gap, dtype=float)] if gap is not None else [])
    cv = _Canvas((0.0, 1.0), _limits(ref), "", "lambda", "Gap eigenvalues", caption)
    if gap is not None:
        cv.hline(gap[0])
        cv.hline(gap[1])
    for lam in eigs:
        Y = _f(float(cv.py(lam)))
        cv.parts.append(f'<line x1="{_f(float(cv.px(0.3)))}" y1="{Y}" x2="{_f(float(cv.px(0.7)))}" y2="{Y}" stroke="{COLORS[0]}" stroke-width="2"/>')
    return cv


_BUILDERS = {
    "phase_plane": _phase_plane,
    "error_loglog": _error_loglog,
    "profile": _profile,
    "spectrum_ladder": _spectrum_ladder,
}


def _is_empty(data, kind) -> bool:
    if not data:
        return True
    key = {"phase_plane": "orbit", "error_loglog": "h", "profile": "x", "spectrum_ladder": None}[kind]
    if key is None:
        return len(data.get("eigs", [])) == 0 and data.get("gap") is None
    v = data.get(key)
    if v is None:
        return True
    if kind == "phase_plane":
        return len(v) != 2 or np.size(v[0]) == 0
    return np.size(v) == 0


def emit_svg(dataset: dict, plot_kind: str, path=None, caption: str = "") -> str:
    """Render ``dataset`` as an SVG document; also writes it when ``path`` is given.

    Dataset layouts:
      phase_plane      ``{"orbit": (u, v), "level_curves": [(u, v), ...]}``
      error_loglog     ``{"h": [...], "error": [...], "rate": float}``
      profile          ``{"x": [...], "series": {name: [...]}}``
      spectrum_ladder  ``{"eigs": [...], "gap": (lo, hi)}``
    """
    if plot_kind not in _BUILDERS:
        raise ValueError(f"unknown plot kind {plot_kind!r}; expected one of {', '.join(PLOT_KINDS)}")
    if _is_empty(dataset, plot_kind):
        raise ValueError("empty dataset")
    svg = _BUILDERS[plot_kind](dataset, caption).render()
    if path is not None:
        write_atomic(path, svg)
    return svg
