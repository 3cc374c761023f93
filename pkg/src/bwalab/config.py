"""Experiment configuration: per-command schemas and validation.

A configuration is a JSON object with a ``command`` key plus the parameters of that
command.  Command-line flags override values from a file.  Every physical parameter
is checked against the preconditions of the module that will consume it before
any computation starts; failures raise :class:`ConfigError` carrying a field path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import ConfigError
from .mass import MassProfile

__all__ = ["COMMANDS", "ExperimentConfig", "parse_config", "build_mass", "BUILTIN_DATA"]

COMMANDS = ("evolve-discrete", "evolve-continuum", "converge", "standing-wave", "spectrum")
BUILTIN_DATA = ("builtin:gaussian",)

_REQUIRED = object()


# --- field coercers -------------------------------------------------------


def _number(path, v, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        if isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                raise ConfigError(path, f"expected a number, got {v!r}") from None
        else:
            raise ConfigError(path, f"expected a number, got {type(v).__name__}")
    v = float(v)
    if not np.isfinite(v):
        raise ConfigError(path, "must be finite")
    if positive and not v > 0:
        raise ConfigError(path, f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(path, f"must be non-negative, got {v}")
    return v


def _pos(path, v):
    return _number(path, v, positive=True)


def _nonneg(path, v):
    return _number(path, v, nonneg=True)


def _opt_pos(path, v):
    return None if v is None else _pos(path, v)


def _int(path, v):
    if isinstance(v, str):
        try:
            v = int(v)
        except ValueError:
            raise ConfigError(path, f"expected an integer, got {v!r}") from None
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def _float_list(path, v):
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    if not isinstance(v, (list, tuple)):
        raise ConfigError(path, "expected a list of numbers")
    return [_number(f"{path}[{i}]", x) for i, x in enumerate(v)]


def _string(path, v):
    if not isinstance(v, str) or not v:
        raise ConfigError(path, "expected a non-empty string")
    return v


def _bool(path, v):
    if isinstance(v, bool):
        return v
    raise ConfigError(path, "expected true or false")


def _datum(path, v):
    v = _string(path, v)
    if v.startswith("builtin:") and v not in BUILTIN_DATA:
        raise ConfigError(path, f"unknown builtin datum {v!r}; known: {', '.join(BUILTIN_DATA)}")
    return v


_MASS_KEYS = {
    "constant": {"kind", "beta"},
    "domain_wall": {"kind", "beta_inf", "length_scale", "shape"},
}


def _mass(path, v):
    if isinstance(v, str):
        try:
            v = json.loads(v)
        except json.JSONDecodeError as exc:
            raise ConfigError(path, f"malformed JSON: {exc.msg}") from None
    if not isinstance(v, dict):
        raise ConfigError(path, "expected an object with a 'kind' key")
    kind = v.get("kind")
    if kind not in _MASS_KEYS:
        raise ConfigError(f"{path}.kind", f"expected 'constant' or 'domain_wall', got {kind!r}")
    for k in sorted(set(v) - _MASS_KEYS[kind]):
        raise ConfigError(f"{path}.{k}", "unknown key")
    if kind == "constant":
        if "beta" not in v:
            raise ConfigError(f"{path}.beta", "missing")
        return {"kind": "constant", "beta": _pos(f"{path}.beta", v["beta"])}
    out = {
        "kind": "domain_wall",
        "beta_inf": _pos(f"{path}.beta_inf", v.get("beta_inf", 1.0)),
        "length_scale": _pos(f"{path}.length_scale", v.get("length_scale", 1.0)),
        "shape": v.get("shape", "tanh"),
    }
    if out["shape"] not in ("tanh", "sign"):
        raise ConfigError(f"{path}.shape", f"expected 'tanh' or 'sign', got {out['shape']!r}")
    return out


def build_mass(spec: dict) -> MassProfile:
    if spec["kind"] == "constant":
        return MassProfile.constant(spec["beta"])
    return MassProfile.domain_wall(spec["beta_inf"], spec["length_scale"], spec.get("shape", "tanh"))


_DEFAULT_MASS = {"kind": "constant", "beta": 1.0}
_DEFAULT_LADDER = [0.2, 0.1, 0.05, 0.025]

# name -> (coercer, default)
SCHEMAS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "evolve-discrete": {
        "h": (_pos, 0.05),
        "zend": (_nonneg, 1.0),
        "dz": (_opt_pos, None),
        "mass": (_mass, _DEFAULT_MASS),
        "datum": (_datum, "builtin:gaussian"),
        "snapshots": (_float_list, []),
        "window": (_pos, 12.0),
        "out": (_string, "discrete-run"),
    },
    "evolve-continuum": {
        "L": (_pos, 20.0),
        "N": (_int, 4096),
        "zend": (_nonneg, 1.0),
        "dz": (_pos, 1e-3),
        "mass": (_mass, _DEFAULT_MASS),
        "datum": (_datum, "builtin:gaussian"),
        "snapshots": (_float_list, []),
        "out": (_string, "continuum-run"),
    },
    "converge": {
        "datum": (_datum, "builtin:gaussian"),
        "mass": (_mass, _DEFAULT_MASS),
        "T": (_pos, 0.2),
        "ladder": (_float_list, _DEFAULT_LADDER),
        "window": (_pos, 12.0),
        "box": (_pos, 20.0),
        "out": (_string, "report.json"),
        "svg": (lambda p, v: None if v is None else _string(p, v), None),
        "timings": (_bool, False),
    },
    "standing-wave": {
        "mass": (_mass, _DEFAULT_MASS),
        "omega": (_number, _REQUIRED),
        "xmax": (_opt_pos, None),
        "tol": (_opt_pos, None),
        "out": (_string, "profile.csv"),
        "svg": (lambda p, v: None if v is None else _string(p, v), None),
    },
    "spectrum": {
        "mass": (_mass, _DEFAULT_MASS),
        "h": (_pos, 0.02),
        "L": (_pos, 40.0),
        "gap_margin": (_opt_pos, None),
        "out": (_string, "spectrum.json"),
    },
}


def _check_smooth(params):
    if params["mass"].get("shape") == "sign":
        raise ConfigError("mass.shape", "the sign wall is admitted only by the spectrum command")


def _validate(command: str, p: dict):
    if command == "evolve-discrete":
        _check_smooth(p)
        if p["dz"] is not None and p["dz"] > p["h"]:
            raise ConfigError("dz", f"RK4 stability needs dz <= h = {p['h']}")
        if any(s < 0 or s > p["zend"] for s in p["snapshots"]):
            raise ConfigError("snapshots", "snapshot positions must lie in [0, zend]")
    elif command == "evolve-continuum":
        _check_smooth(p)
        N = p["N"]
        if N < 8 or N & (N - 1):
            raise ConfigError("N", f"must be a power of two >= 8, got {N}")
        if any(s < 0 or s > p["zend"] for s in p["snapshots"]):
            raise ConfigError("snapshots", "snapshot positions must lie in [0, zend]")
    elif command == "converge":
        _check_smooth(p)
        lad = p["ladder"]
        if len(lad) < 2:
            raise ConfigError("ladder", "need at least two spacings")
        if any(h <= 0 for h in lad) or any(b >= a for a, b in zip(lad, lad[1:])):
            raise ConfigError("ladder", "spacings must be positive and strictly decreasing")
    elif command == "standing-wave":
        _check_smooth(p)
        m = p["mass"]
        binf = m["beta"] if m["kind"] == "constant" else m["beta_inf"]
        if not 0 < p["omega"] < binf:
            raise ConfigError("omega", f"must lie in (0, {binf:g}), got {p['omega']:g}")
    elif command == "spectrum":
        h, L = p["h"], p["L"]
        if h > 0.1:
            raise ConfigError("h", f"finite section needs h <= 0.1, got {h}")
        M = round(L / h)
        if M < 2 or not np.isclose(M * h, L, rtol=1e-9, atol=1e-12):
            raise ConfigError("L", f"L/h must be an integer, got L={L}, h={h}")
        if p["gap_margin"] is not None and p["gap_margin"] < 5 * h - 1e-12:
            raise ConfigError("gap_margin", f"must be at least 5 h = {5 * h:g}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated configuration.  ``parameters`` holds every field, defaults filled in."""

    command: str
    parameters: dict = field(default_factory=dict)

    @property
    def output_path(self) -> Path:
        return Path(self.parameters["out"])

    @property
    def output_dir(self) -> Path:
        """Directory that receives the outputs and the manifest."""
        out = self.output_path
        return out if self.command.startswith("evolve-") else out.parent

    def __getitem__(self, key):
        return self.parameters[key]

    def to_dict(self) -> dict:
        return {"command": self.command, **self.parameters}


def _load(source) -> dict:
    if source is None:
        return {}
    if isinstance(source, dict):
        return dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "[")) and source.strip()):
        text = Path(source).read_text()
    else:
        text = source
    if not text.strip():
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "configuration must be a JSON object")
    return doc


def parse_config(source=None, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a JSON document (text, path or dict) merged with flag ``overrides``.

    ``overrides`` entries equal to ``None`` are ignored, so an argparse namespace can
    be passed through unchanged.
    """
    doc = _load(source)
    for k, v in (overrides or {}).items():
        if v is not None:
            doc[k.replace("-", "_") if k != "command" else k] = v
    if "command" not in doc:
        raise ConfigError("command", "missing")
    command = doc.pop("command")
    if command not in SCHEMAS:
        raise ConfigError("command", f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    schema = SCHEMAS[command]
    for k in sorted(doc):
        if k not in schema:
            raise ConfigError(k, f"unknown key for command {command!r}")
    params = {}
    for name, (coerce, default) in schema.items():
        if name in doc:
            params[name] = coerce(name, doc[name])
        elif default is _REQUIRED:
            raise ConfigError(name, "missing")
        else:
            params[name] = coerce(name, default) if default is not None else None
    _validate(command, params)
    return ExperimentConfig(command, params)
