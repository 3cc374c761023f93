"""Deterministic persistence: CSV fields, JSON reports and run manifests.

Every file is written atomically (temporary file in the target directory, then
``os.replace``).  Floats are printed with 17 significant digits so that a round trip
through CSV is exact and repeated runs produce identical bytes.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .continuum import ContinuumField
from .lattice import LatticeField

__all__ = [
    "write_atomic",
    "sha256_file",
    "to_jsonable",
    "dumps_json",
    "write_json",
    "fmt",
    "write_lattice_csv",
    "read_lattice_csv",
    "write_continuum_csv",
    "read_continuum_csv",
    "write_profile_csv",
    "write_rows_csv",
    "RunManifest",
]


def fmt(x) -> str:
    return repr(float(x)) if math.isfinite(float(x)) else str(float(x))


def write_atomic(path, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def to_jsonable(obj):
    """Convert numpy scalars/arrays and tuples; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    return write_atomic(path, dumps_json(obj))


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_rows_csv(path, header, rows) -> Path:
    return write_atomic(path, _csv_text(header, [[fmt(v) if not isinstance(v, (str, int)) else v for v in r] for r in rows]))


def _spinor_cols(vals: np.ndarray):
    v = np.asarray(vals, dtype=complex)
    return v[:, 0].real, v[:, 0].imag, v[:, 1].real, v[:, 1].imag


def write_lattice_csv(path, psi: LatticeField) -> Path:
    """Columns ``n, x, re1, im1, re2, im2`` with ``x = n h``."""
    if psi.values.ndim != 2 or psi.values.shape[1] != 2:
        raise ValueError("expected a spinor field")
    cols = _spinor_cols(psi.values)
    rows = [[int(n), fmt(n * psi.h)] + [fmt(c[j]) for c in cols] for j, n in enumerate(psi.n)]
    return write_atomic(path, _csv_text(["n", "x", "re1", "im1", "re2", "im2"], rows))


def _read_table(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = [c.strip() for c in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if got != header:
            raise ValueError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    try:
        return np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def read_lattice_csv(path) -> LatticeField:
    t = _read_table(path, ["n", "x", "re1", "im1", "re2", "im2"])
    n = t[:, 0].astype(np.int64)
    if np.any(np.diff(n) != 1):
        raise ValueError(f"{path}: site indices must be consecutive")
    nz = n != 0
    h = float(np.median(t[nz, 1] / n[nz])) if nz.any() else float("nan")
    if not (h > 0) or not np.allclose(t[:, 1], n * h, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{path}: x column is not n*h for a single positive h")
    vals = np.stack([t[:, 2] + 1j * t[:, 3], t[:, 4] + 1j * t[:, 5]], axis=1)
    return LatticeField(h, int(n[0]), vals)


def write_continuum_csv(path, psi: ContinuumField) -> Path:
    cols = _spinor_cols(psi.values)
    rows = [[fmt(x)] + [fmt(c[j]) for c in cols] for j, x in enumerate(psi.x)]
    return write_atomic(path, _csv_text(["x", "re1", "im1", "re2", "im2"], rows))


def read_continuum_csv(path) -> ContinuumField:
    t = _read_table(path, ["x", "re1", "im1", "re2", "im2"])
    N = t.shape[0]
    dx = (t[-1, 0] - t[0, 0]) / (N - 1) if N > 1 else float("nan")
    L = -t[0, 0]
    if not (L > 0 and np.isclose(2 * L / N, dx, rtol=1e-9)):
        raise ValueError(f"{path}: x column must be -L + j*2L/N")
    vals = np.stack([t[:, 1] + 1j * t[:, 2], t[:, 3] + 1j * t[:, 4]], axis=1)
    return ContinuumField(float(L), N, vals)


def write_profile_csv(path, xs, us, vs) -> Path:
    rows = [[fmt(x), fmt(u), fmt(v)] for x, u, v in zip(xs, us, vs)]
    return write_atomic(path, _csv_text(["x", "u", "v"], rows))


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Crash-evident record of one run.

    :meth:`begin` writes the manifest with ``status = "running"`` before any
    computation; :meth:`finish` rewrites it with the end time, the final status and a
    sha256 checksum of every output.  Timestamps make the manifest itself the one
    file that differs between repeated runs.
    """

    path: Path
    config: dict
    version: str
    started: str = ""
    finished: str | None = None
    status: str = "running"
    outputs: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "status": self.status,
            "outputs": self.outputs,
            "summary": self.summary,
            "error": self.error,
        }

    def begin(self) -> "RunManifest":
        self.started = _now()
        write_json(self.path, self.to_dict())
        return self

    def add_output(self, path) -> None:
        path = Path(path)
        try:
            key = str(path.relative_to(self.path.parent))
        except ValueError:
            key = str(path)
        self.outputs[key] = sha256_file(path)

    def finish(self, status: str = "ok", error: str | None = None) -> None:
        self.finished = _now()
        self.status = status
        self.error = error
        write_json(self.path, self.to_dict())
