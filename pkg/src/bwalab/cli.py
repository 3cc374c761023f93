"""Command-line front end: ``bwalab <command> [flags]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, build_mass, parse_config
from .continuum import ContinuumField, evolve_continuum
from .convergence import StudyConfig, gaussian_datum, run_study
from .discrete import evolve_discrete
from .errors import ConfigError, NumericalError
from .io import (
    RunManifest,
    dumps_json,
    read_continuum_csv,
    read_lattice_csv,
    write_continuum_csv,
    write_json,
    write_lattice_csv,
    write_profile_csv,
    write_rows_csv,
)
from .lattice import discretize, window_for
from .spectral import assemble, gap_eigenvalues
from .standing import domain_wall_wave, homoclinic_orbit, level_curve
from .svg import emit_svg

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _snapshot_name(i: int, z: float) -> str:
    return f"snapshot_{i:03d}_z{z:.6f}.csv"


# --- data ---------------------------------------------------------------


def _lattice_datum(cfg: ExperimentConfig):
    h = cfg["h"]
    if cfg["datum"] == "builtin:gaussian":
        lo, hi = window_for(cfg["window"], h)
        return discretize(gaussian_datum, h, lo, hi)
    psi = read_lattice_csv(cfg["datum"])
    if not np.isclose(psi.h, h, rtol=1e-9):
        raise ConfigError("datum", f"file spacing {psi.h:g} differs from h = {h:g}")
    return psi


def _continuum_datum(cfg: ExperimentConfig):
    if cfg["datum"] == "builtin:gaussian":
        return ContinuumField.from_function(gaussian_datum, cfg["L"], cfg["N"])
    psi = read_continuum_csv(cfg["datum"])
    if psi.N != cfg["N"] or not np.isclose(psi.L, cfg["L"], rtol=1e-9):
        raise ConfigError("datum", f"file grid (L={psi.L:g}, N={psi.N}) differs from L={cfg['L']:g}, N={cfg['N']}")
    return psi


def _datum_function(spec: str):
    """Callable datum for refinement studies; a continuum CSV is interpolated linearly."""
    if spec == "builtin:gaussian":
        return gaussian_datum
    psi = read_continuum_csv(spec)
    x = psi.x

    def f(y):
        y = np.asarray(y, dtype=float)
        cols = [np.interp(y, x, c, left=0.0, right=0.0) for c in (
            psi.values[:, 0].real, psi.values[:, 0].imag, psi.values[:, 1].real, psi.values[:, 1].imag)]
        return np.stack([cols[0] + 1j * cols[1], cols[2] + 1j * cols[3]], axis=-1)

    return f


# --- commands -----------------------------------------------------------


def run_evolve_discrete(cfg: ExperimentConfig, manifest: RunManifest):
    out = cfg.output_dir
    psi0 = _lattice_datum(cfg)
    traj = evolve_discrete(psi0, build_mass(cfg["mass"]), cfg["zend"], cfg["dz"], cfg["snapshots"])
    for i, (z, psi) in enumerate(zip(traj.zs, traj.states)):
        manifest.add_output(write_lattice_csv(out / _snapshot_name(i, z), psi))
    rows = zip(traj.zs, traj.l2h, traj.h1h, traj.linf)
    manifest.add_output(write_rows_csv(out / "norms.csv", ["z", "l2h", "h1h", "linf"], rows))
    manifest.summary = {"norm_drift": traj.norm_drift(), "snapshots": len(traj.zs)}


def run_evolve_continuum(cfg: ExperimentConfig, manifest: RunManifest):
    out = cfg.output_dir
    chi = _continuum_datum(cfg)
    traj = evolve_continuum(chi, build_mass(cfg["mass"]), cfg["zend"], cfg["dz"], cfg["snapshots"])
    for i, psi in enumerate(traj.states):
        manifest.add_output(write_continuum_csv(out / _snapshot_name(i, psi.z), psi))
    manifest.add_output(write_rows_csv(out / "norms.csv", ["z", "l2", "linf"], zip(traj.zs, traj.l2, traj.linf)))
    drift = max(abs(n - traj.l2[0]) for n in traj.l2) / traj.l2[0] if traj.l2[0] > 0 else 0.0
    manifest.summary = {"norm_drift": drift, "snapshots": len(traj.states)}


def run_converge(cfg: ExperimentConfig, manifest: RunManifest):
    mass = build_mass(cfg["mass"])
    study = StudyConfig(lattice_half_width=cfg["window"], box_half_width=cfg["box"])
    report = run_study(_datum_function(cfg["datum"]), mass, cfg["T"], cfg["ladder"], study, datum_id=cfg["datum"])
    doc = report.to_dict(timings=cfg["timings"])
    doc["mass"] = cfg["mass"]
    out = cfg.output_path
    manifest.add_output(write_json(out, doc))
    svg = Path(cfg["svg"]) if cfg["svg"] else out.with_suffix(".svg")
    caption = f"T = {cfg['T']:g}, mass {mass.id}, fitted rate {report.fitted_rate:.3f}"
    emit_svg({"h": report.hs, "error": report.l2_errors, "rate": report.fitted_rate}, "error_loglog", svg, caption)
    manifest.add_output(svg)
    manifest.summary = {"rate": report.fitted_rate, "ratios": report.ratios(), "reference_error": report.reference_error}


def run_standing_wave(cfg: ExperimentConfig, manifest: RunManifest):
    mass = build_mass(cfg["mass"])
    omega = cfg["omega"]
    kw = {"tol": cfg["tol"]} if cfg["tol"] else {}
    if mass.is_constant:
        prof = homoclinic_orbit(mass.beta, omega, cfg["xmax"], **kw)
    else:
        prof = domain_wall_wave(mass, omega, cfg["xmax"], **kw)
    manifest.add_output(write_profile_csv(cfg.output_path, prof.xs, prof.us, prof.vs))
    if cfg["svg"]:
        curves = level_curve(mass.beta_inf, omega)
        caption = f"orbit and level curve H = 0, beta = {mass.beta_inf:g}, omega = {omega:g}, mass {mass.id}"
        emit_svg({"orbit": (prof.us, prof.vs), "level_curves": curves}, "phase_plane", cfg["svg"], caption)
        manifest.add_output(cfg["svg"])
    manifest.summary = prof.diagnostics


def run_spectrum(cfg: ExperimentConfig, manifest: RunManifest):
    try:
        A = assemble(build_mass(cfg["mass"]), cfg["h"], cfg["L"])
    except ValueError as exc:
        raise ConfigError("L", str(exc)) from None
    margin = cfg["gap_margin"] if cfg["gap_margin"] is not None else 10 * cfg["h"]
    pairs = gap_eigenvalues(A, margin)
    gap = [-A.beta_inf + margin, A.beta_inf - margin]
    out = cfg.output_path
    eigs = []
    for i, p in enumerate(pairs):
        vec = out.parent / f"{out.stem}_eig{i}.csv"
        manifest.add_output(write_lattice_csv(vec, A.to_spinor(p.vector / np.sqrt(A.h))))
        eigs.append({"lambda": p.value, "residual": p.residual, "vector": vec.name})
    doc = {"gap": gap, "eigs": eigs, "h": cfg["h"], "L": cfg["L"], "mass": cfg["mass"]}
    manifest.add_output(write_json(out, doc))
    manifest.summary = {"count": len(eigs), "eigenvalues": [e["lambda"] for e in eigs]}


RUNNERS = {
    "evolve-discrete": run_evolve_discrete,
    "evolve-continuum": run_evolve_continuum,
    "converge": run_converge,
    "standing-wave": run_standing_wave,
    "spectrum": run_spectrum,
}


# --- argument parsing ---------------------------------------------------


def _add(p, *names, **kw):
    kw.setdefault("default", None)
    p.add_argument(*names, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bwalab", description="Binary waveguide array / nonlinear Dirac numerics.")
    parser.add_argument("--version", action="version", version=f"bwalab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p, mass=True):
        _add(p, "--config", help="JSON configuration file; flags override its values")
        if mass:
            _add(p, "--mass", help='mass as JSON, e.g. \'{"kind": "domain_wall", "beta_inf": 1.0}\'')

    p = sub.add_parser("evolve-discrete", help="evolve the discrete nonlinear Dirac system")
    common(p)
    _add(p, "--h", type=float)
    _add(p, "--zend", type=float)
    _add(p, "--dz", type=float)
    _add(p, "--datum", help="builtin:gaussian or a lattice CSV (n,x,re1,im1,re2,im2)")
    _add(p, "--snapshots", help="comma separated z values")
    _add(p, "--window", type=float, help="half width of the lattice window for builtin data")
    _add(p, "--out", help="output directory")

    p = sub.add_parser("evolve-continuum", help="evolve the cubic Dirac equation by Strang splitting")
    common(p)
    _add(p, "--L", type=float)
    _add(p, "--N", type=int)
    _add(p, "--zend", type=float)
    _add(p, "--dz", type=float)
    _add(p, "--datum", help="builtin:gaussian or a continuum CSV (x,re1,im1,re2,im2)")
    _add(p, "--snapshots")
    _add(p, "--out", help="output directory")

    p = sub.add_parser("converge", help="discrete-to-continuum refinement study")
    common(p)
    _add(p, "--datum")
    _add(p, "--T", type=float)
    _add(p, "--ladder", help="comma separated, strictly decreasing h values")
    _add(p, "--out", help="report JSON path")
    _add(p, "--svg", help="log-log error plot (default: report path with .svg)")
    _add(p, "--timings", action="store_true", default=None, help="record wall-clock seconds per rung")

    p = sub.add_parser("standing-wave", help="standing-wave profile for constant or domain-wall mass")
    common(p)
    _add(p, "--omega", type=float)
    _add(p, "--xmax", type=float)
    _add(p, "--tol", type=float)
    _add(p, "--out", help="profile CSV path")
    _add(p, "--svg", help="phase-plane plot path")

    p = sub.add_parser("spectrum", help="gap eigenvalues of the finite-section Dirac operator")
    common(p)
    _add(p, "--h", type=float)
    _add(p, "--L", type=float)
    _add(p, "--gap-margin", dest="gap_margin", type=float)
    _add(p, "--out", help="spectrum JSON path")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command")}
    doc = {}
    if args.config:
        text = Path(args.config).read_text()
        doc = json.loads(text) if text.strip() else {}
        if not isinstance(doc, dict):
            raise ConfigError("", "configuration must be a JSON object")
        if doc.get("command", args.command) != args.command:
            raise ConfigError("command", f"config file is for {doc.get('command')!r}, not {args.command!r}")
    flags["command"] = args.command
    return parse_config(doc, flags)


def execute(cfg: ExperimentConfig) -> RunManifest:
    """Run a validated configuration, writing outputs and the manifest."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(cfg.output_dir / "manifest.json", cfg.to_dict(), __version__).begin()
    try:
        RUNNERS[cfg.command](cfg, manifest)
    except BaseException as exc:
        manifest.finish("failed", f"{type(exc).__name__}: {exc}")
        raise
    manifest.finish("ok")
    return manifest


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        manifest = execute(cfg)
    except json.JSONDecodeError as exc:
        print(f"bwalab: config error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"bwalab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"bwalab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"bwalab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"bwalab: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(dumps_json(manifest.summary))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
