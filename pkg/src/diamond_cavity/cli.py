"""Command-line front end.

    diamond-cavity <map-state|tpi-scan|fom|validate|coeffs> --config FILE [--out DIR] [--jobs N]

Every run writes CSV files plus ``manifest.json`` into the output directory.
Errors are reported on stderr as one JSON object; the exit status is 2 for
configuration problems and 3 for failures during computation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import (
    CavityGeometry,
    MirrorSpec,
    derive_system,
    load_atom_preset,
)
from .config import CavityBlock, RunConfig, load_config
from .dynamics import detect_jumps, state_mapping_report, tpi_deviation_scan
from .errors import ConfigError, DiamondCavityError, SingularityError, UnstableDriftError
from .inout import extraction_conditions, figure_of_merit, fom_sylvester, langevin_matrix
from .model import effective_coefficients, validity_report

log = logging.getLogger("diamond_cavity")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
TWO_PI = 2.0 * math.pi


def fmt(x) -> str:
    """12 significant digits in scientific notation; integers and strings verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


class RunContext:
    def __init__(self, command: str, cfg: RunConfig, out: Path, jobs: int):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.jobs = jobs
        self.files: list[Path] = []
        self.timings: dict[str, float] = {}
        self.warnings: list[str] = []
        self.resolved: dict = {}

    def stage(self, name: str):
        ctx = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                ctx.timings[name] = time.perf_counter() - self.t0

        return _Timer()

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        path = self.out / name
        _atomic_write(path, buf.getvalue().encode())
        self.files.append(path)
        return path

    def warn(self, msg: str):
        log.warning(msg)
        self.warnings.append(msg)

    def write_manifest(self):
        files = []
        for path in self.files:
            if not path.exists():
                raise DiamondCavityError(f"expected output {path} is missing")
            data = path.read_bytes()
            files.append({"name": path.name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})
        manifest = {
            "command": self.command,
            "experiment": self.cfg.experiment,
            "config_sha256": self.cfg.sha256(),
            "software_version": __version__,
            "resolved_parameters": self.resolved,
            "timings_s": self.timings,
            "warnings": self.warnings,
            "files": files,
        }
        _atomic_write(self.out / "manifest.json", (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# parameter resolution


def _system_from_cavity(block: CavityBlock, t2_prime_ppm: float | None = None, length_mm: float | None = None):
    r = block.radius_mm * 1e-3
    mirrors = MirrorSpec(
        t1_ppm=block.t1_ppm, t2_ppm=block.t2_ppm, t1_prime_ppm=block.t1_prime_ppm,
        t2_prime_ppm=block.t2_prime_ppm if t2_prime_ppm is None else t2_prime_ppm,
        loss_ppm=block.loss_ppm, radius=r,
    )
    geo = CavityGeometry((block.length_mm if length_mm is None else length_mm) * 1e-3, r)
    return derive_system(geo, mirrors, load_atom_preset(block.atom_preset), block.n_atoms,
                         block.delta_over_g, block.omega_over_delta, block.include_kappa_gamma)


def _params(cfg: RunConfig):
    if cfg.model is not None:
        return cfg.model.to_params()
    if cfg.cavity is not None:
        return _system_from_cavity(cfg.cavity).params
    raise ConfigError("config needs a model or a cavity block")


def _hz(x: float) -> float:
    return x / TWO_PI


def _param_echo(params) -> dict:
    return {
        "g_over_2pi_hz": _hz(params.g), "g_prime_over_2pi_hz": _hz(params.g_prime),
        "delta_over_2pi_hz": _hz(params.delta), "omega_over_2pi_hz": _hz(params.omega),
        "omega_prime_over_2pi_hz": _hz(params.omega_prime), "gamma_over_2pi_hz": _hz(params.gamma),
        "gamma_prime_over_2pi_hz": _hz(params.gamma_prime), "gamma_pp_over_2pi_hz": _hz(params.gamma_pp),
        "n_atoms": params.n_atoms, "cutoff": params.cutoff,
    }


# --------------------------------------------------------------------------
# commands


def cmd_map_state(ctx: RunContext):
    cfg = ctx.cfg
    if cfg.mapping is None:
        raise ConfigError("map-state needs a mapping block")
    params = _params(cfg)
    amps = cfg.mapping.amplitude_vector()
    kmax = int(np.max(np.flatnonzero(amps))) if np.any(amps) else 0
    if params.cutoff < kmax:
        raise ConfigError(f"cutoff {params.cutoff} is below the largest input photon number {kmax}")
    ctx.resolved = _param_echo(params)
    with ctx.stage("mapping"):
        rep = state_mapping_report(
            params, amps, frame=cfg.mapping.frame_choice(params.g),
            window=tuple(cfg.mapping.window_over_tpi), curve_points=cfg.mapping.curve_points,
            curve_span=cfg.mapping.curve_span_over_tpi,
            pass_threshold=cfg.validity.pass_threshold, warn_threshold=cfg.validity.warn_threshold,
        )
    for w in rep.warnings:
        ctx.warn(w)
    ctx.write_csv(
        "photon_transfer.csv", ["t_us", "n_b_numeric", "n_b_analytic", "norm_sq"],
        zip(rep.times * 1e6, rep.n_b, rep.n_b_analytic, rep.norm_sq),
    )
    ctx.write_csv(
        "mapping_report.csv",
        ["t_pi", "fidelity", "success_prob", "t_pi_over_g_inv", "t_pi_analytic", "frame"],
        [(rep.t_pi, rep.fidelity, rep.success_probability, rep.t_pi * params.g,
          rep.t_pi_analytic, rep.frame.variant)],
    )


def cmd_tpi_scan(ctx: RunContext):
    block = ctx.cfg.tpi_scan
    if block is None:
        raise ConfigError("tpi-scan needs a tpi_scan block")
    rows = []
    for s in block.sets:
        params = s.model.to_params()
        ctx.resolved[s.label] = _param_echo(params)
        with ctx.stage(s.label):
            scan = tpi_deviation_scan(params, range(1, block.n_ph_max + 1), tuple(block.window_over_tpi))
        devs = [r.deviation_percent for r in scan]
        jumps = set(detect_jumps(devs, block.jump_threshold_percent))
        for i, r in enumerate(scan):
            rows.append((s.label, r.n_ph, r.t_pi, r.deviation_percent, r.t_pi * params.g, i in jumps))
    ctx.write_csv("tpi_deviation.csv", ["set", "n_ph", "t_pi", "deviation_percent", "t_pi_over_g_inv", "jump"], rows)


def _fom_point(args):
    block, length_mm, t2p = args
    try:
        sysm = _system_from_cavity(block, t2_prime_ppm=t2p, length_mm=length_mm)
        return length_mm, t2p, fom_sylvester(sysm.langevin.m, sysm.langevin.eta), ""
    except (UnstableDriftError, SingularityError, ValueError, ArithmeticError) as exc:
        return length_mm, t2p, math.nan, f"l={length_mm} mm, T2'={t2p} ppm: {exc}"


def cmd_fom(ctx: RunContext):
    cfg = ctx.cfg
    fom = cfg.fom
    if fom is None:
        raise ConfigError("fom needs a fom block")
    if cfg.cavity is None:
        raise ConfigError("fom needs a cavity block")
    if fom.mode == "point":
        with ctx.stage("derive"):
            sysm = _system_from_cavity(cfg.cavity)
        ctx.resolved = {k: v for k, v in _param_echo(sysm.params).items()}
        with ctx.stage("fom"):
            res = figure_of_merit(sysm.langevin)
        rows = [("F_sylvester", res.f_sylvester, "1"), ("F_quadrature", res.f_quadrature, "1"),
                ("F_approx", res.f_approx, "1"), ("length_mm", cfg.cavity.length_mm, "mm"),
                ("t2_prime_ppm", cfg.cavity.t2_prime_ppm, "ppm"), ("n_atoms", cfg.cavity.n_atoms, "1")]
        for k, v in sysm.summary().items():
            rows.append((f"{k}_over_2pi", _hz(v), "Hz"))
        for c in extraction_conditions(sysm.langevin, sysm.params):
            rows.append((f"condition[{c.name}]", c.ratio, "1"))
        ctx.resolved.update({k: _hz(v) for k, v in sysm.summary().items()})
        ctx.write_csv("fom_point.csv", ["quantity", "value", "unit"], rows)
        return
    lengths = fom.length_mm.values()
    t2s = fom.t2_prime_ppm.values()
    tasks = [(cfg.cavity, float(l), float(t)) for l in lengths for t in t2s]
    with ctx.stage("sweep"):
        if ctx.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=ctx.jobs) as pool:
                results = list(pool.map(_fom_point, tasks, chunksize=max(1, len(tasks) // (4 * ctx.jobs))))
        else:
            results = [_fom_point(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))
    for r in results:
        if r[3]:
            ctx.warn(f"unstable or invalid point, F=nan: {r[3]}")
    ctx.resolved = {"grid_points": len(results)}
    ctx.write_csv("fom_sweep.csv", ["l_mm", "T2p_ppm", "F"], [r[:3] for r in results])


def cmd_validate(ctx: RunContext):
    cfg = ctx.cfg
    v = cfg.validity
    rows = []
    if cfg.cavity is not None:
        sysm = _system_from_cavity(cfg.cavity)
        params = sysm.params
        for c in extraction_conditions(sysm.langevin, params, v.pass_threshold):
            status = "pass" if c.satisfied else ("warn" if c.ratio >= v.warn_threshold else "fail")
            rows.append((c.name, c.ratio, c.threshold, status))
    else:
        params = _params(cfg)
    effective_coefficients(params)  # surfaces singular parameter sets as hard errors
    rep = validity_report(params, v.mean_photons_a, v.mean_photons_b, v.pass_threshold, v.warn_threshold)
    rows = [(m.name, m.value, m.threshold, m.status) for m in rep.margins] + rows
    ctx.resolved = _param_echo(params)
    for name, value, thr, status in rows:
        print(f"{name:50s} {value:12.4g}  threshold {thr:g}  {status}")
        if status != "pass":
            ctx.warn(f"{name} = {value:.4g} ({status})")
    ctx.write_csv("validity_report.csv", ["check", "value", "threshold", "status"], rows)


def cmd_coeffs(ctx: RunContext):
    cfg = ctx.cfg
    if cfg.cavity is not None:
        sysm = _system_from_cavity(cfg.cavity)
        params, lm = sysm.params, sysm.langevin
    else:
        params = _params(cfg)
        lm = None
    coeffs = effective_coefficients(params)
    g = params.g
    rows = []
    for name, value in coeffs.as_dict().items():
        if name == "xi":
            scale = g**3
        elif name.startswith("alpha"):
            scale = g
        elif name.startswith("lambda") or name == "epsilon":
            scale = 1.0
        else:
            scale = 1.0 / g
        rows.append((name, value, value * scale))
    if lm is None:
        lm = langevin_matrix(coeffs, params, 0.0, 0.0, 0.0)
    for name in ("zeta1", "theta1", "zeta2", "theta2"):
        value = getattr(lm, name)
        rows.append((name, value, value / g))
    ctx.resolved = _param_echo(params)
    for name, value, scaled in rows:
        print(f"{name:10s} {fmt(value):>20s} rad/s-units  {fmt(scaled):>20s} g-units")
    ctx.write_csv("coefficients.csv", ["name", "value_si", "value_over_g_units"], rows)


COMMANDS = {
    "map-state": cmd_map_state,
    "tpi-scan": cmd_tpi_scan,
    "fom": cmd_fom,
    "validate": cmd_validate,
    "coeffs": cmd_coeffs,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diamond-cavity", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="output directory (default: config output_dir or ./out)")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for sweeps")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def _error(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    level = os.environ.get("DIAMOND_CAVITY_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        return _error("config", ConfigError("--jobs must be at least 1"), 2)
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.output_dir or "out")
        ctx = RunContext(args.command, cfg, out, args.jobs)
        COMMANDS[args.command](ctx)
        ctx.write_manifest()
    except (ConfigError, SingularityError) as exc:
        return _error("config", exc, 2)
    except (DiamondCavityError, ArithmeticError, ValueError, RuntimeError) as exc:
        return _error("computation", exc, 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
