"""Command-line front end.

Exit status: 0 on success, 1 when a solver or runtime failure stops the run,
2 for configuration errors. Errors go to stderr; the JSON summary to stdout.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import io as qio
from .config import MODES, ConfigError, RunConfig, load_config
from .grid import GridError, GridSpec, SignalField, SpinWave, make_gaussian_input, norm2
from .params import TWO_PI, MemoryParams, ParameterError, get_preset

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
OUT_ENV = "QMEM_OUT"


# --------------------------------------------------------------------------
# model assembly


def _preset(cfg: RunConfig):
    return get_preset(cfg.model.preset, cfg.preset_table())


def build_params(cfg: RunConfig, C_in: float | None = None, C_out: float | None = None):
    """(params_in, params_out, geometry) for the configured model."""
    from .singlemode import scenario_setup

    m = cfg.model
    C_in = m.C_in if C_in is None else C_in
    C_out = m.C_out if C_out is None else C_out
    if m.scenario == "none":
        return MemoryParams(C=C_in, q=m.q, p=m.p), MemoryParams(C=C_out, q=m.q, p=m.p), None
    preset = _preset(cfg)
    delta = None if m.detuning_hz is None else TWO_PI * m.detuning_hz
    s = scenario_setup(preset, m.scenario, C_in, C_out, delta=delta, pulse_T=m.pulse_s, d=m.optical_depth, L=m.length_m)
    return s.params_in, s.params_out, s.geometry


def build_input(cfg: RunConfig, params: MemoryParams) -> SignalField:
    from .modes import optimal_input

    i = cfg.input
    if i.kind == "gaussian":
        return make_gaussian_input(cfg.grid, i.eps_center, i.eps_width, i.x_width)
    return optimal_input(params, cfg.grid, i.x_width if cfg.grid.transverse else None)


# --------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepResult:
    C_in: np.ndarray
    C_out: np.ndarray
    nu: np.ndarray  # (len(C_in), len(C_out)); NaN where a cell failed
    eta_storage: np.ndarray
    eta_retrieval: np.ndarray
    wall_time: np.ndarray
    errors: dict

    def rows(self):
        for i, a in enumerate(self.C_in):
            for j, b in enumerate(self.C_out):
                yield float(a), float(b), float(self.nu[i, j]), float(self.eta_storage[i, j]), float(self.eta_retrieval[i, j])


def _sweep_cell(args):
    cfg, i, j, C_in, C_out = args
    from .singlemode import roundtrip

    t0 = time.perf_counter()
    try:
        p_in, p_out, geom = build_params(cfg, C_in, C_out)
        r = roundtrip(p_in, p_out, geom, cfg.grid, build_input(cfg, p_in))
        vals, err = (r.nu, r.eta_storage, r.eta_retrieval), None
    except (ArithmeticError, ValueError) as e:
        vals, err = (math.nan,) * 3, f"{type(e).__name__}: {e}"
    return i, j, vals, err, time.perf_counter() - t0


def sweep(cfg: RunConfig, workers: int | None = None, order=None) -> SweepResult:
    """Evaluate nu on the (C_in, C_out) grid. ``order`` permutes cell evaluation (testing aid)."""
    a_in, a_out = cfg.sweep.axis("C_in"), cfg.sweep.axis("C_out")
    cells = [(cfg, i, j, float(a), float(b)) for i, a in enumerate(a_in) for j, b in enumerate(a_out)]
    if order is not None:
        cells = [cells[k] for k in order]
    workers = workers if workers is not None else (cfg.workers or os.cpu_count() or 1)
    if workers <= 1 or len(cells) == 1:
        results = [_sweep_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, cells))
    shape = (len(a_in), len(a_out))
    nu, es, er, wt = (np.full(shape, np.nan) for _ in range(4))
    errors = {}
    for i, j, vals, err, dt in results:
        nu[i, j], es[i, j], er[i, j] = vals
        wt[i, j] = dt
        if err:
            errors[f"{i},{j}"] = err
    return SweepResult(a_in, a_out, nu, es, er, wt, errors)


# --------------------------------------------------------------------------
# subcommands; each returns (summary, metadata) and writes its artifacts


class Run:
    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg = cfg
        self.out = out
        self.meta: dict = {}

    def wants(self, fmt: str) -> bool:
        return fmt in self.cfg.formats

    def grid_file(self, name, values, component=None):
        if self.wants("grid"):
            qio.write_grid(self.out / name, values, component)

    def csv_file(self, name, header, rows):
        if self.wants("csv"):
            qio.write_csv(self.out / name, header, rows)

    # -- single mode
    def store(self):
        from .singlemode import SolverOptions, solve_storage

        p_in, _, _ = build_params(self.cfg)
        a = build_input(self.cfg, p_in)
        r = solve_storage(p_in, self.cfg.grid, a, SolverOptions(probe_convergence=True))
        self.grid_file("spin_wave.qmemgrid", r.beta.values)
        self.grid_file("input.qmemgrid", a.values)
        prof = np.sum(np.abs(r.beta.values) ** 2, axis=1) * self.cfg.grid.dx
        self.csv_file("spin_wave_profile.csv", ["zeta", "intensity"], zip(self.cfg.grid.zeta, prof))
        return {"eta_storage": r.eta_storage, "status": r.status, "warnings": list(r.warnings), "C": p_in.C}

    def retrieve(self):
        from .modes import optimal_retrieval_mode
        from .singlemode import solve_retrieval_full

        cfg = self.cfg
        _, p_out, _ = build_params(cfg)
        grid = cfg.grid
        if cfg.input.spin_wave:
            gf = qio.read_grid(cfg.input.spin_wave)
            if gf.values.shape != (grid.n_zeta, grid.n_x):
                raise ConfigError(f"spin wave shape {gf.values.shape} does not match grid", key="input.spin_wave")
            b = SpinWave(gf.values, grid)
        else:
            g1 = GridSpec(grid.n_eps, grid.n_zeta, 1)
            prof = optimal_retrieval_mode(replace(p_out, p=0.0), g1).mode.values[:, 0]
            beam = np.exp(-grid.x**2 / (2 * cfg.input.x_width**2)) if grid.transverse else np.ones(1)
            b = SpinWave(prof[:, None] * beam[None, :], grid)
            b = b.scaled(1 / math.sqrt(norm2(b)))
        r = solve_retrieval_full(p_out, grid, b)
        self.grid_file("output.qmemgrid", r.alpha_out.values)
        prof = np.sum(np.abs(r.alpha_out.values) ** 2, axis=1) * grid.dx
        self.csv_file("output_profile.csv", ["eps", "intensity"], zip(grid.eps, prof))
        return {"eta_retrieval": r.eta_retrieval, "C": p_out.C, "warnings": []}

    def roundtrip(self):
        from .singlemode import roundtrip

        p_in, p_out, geom = build_params(self.cfg)
        r = roundtrip(p_in, p_out, geom, self.cfg.grid, build_input(self.cfg, p_in))
        self.grid_file("output.qmemgrid", r.alpha_out.values)
        self.grid_file("spin_wave.qmemgrid", r.beta_stored.values)
        prof = np.sum(np.abs(r.alpha_out.values) ** 2, axis=1) * self.cfg.grid.dx
        self.csv_file("output_profile.csv", ["eps", "intensity"], zip(self.cfg.grid.eps, prof))
        return {
            "nu": r.nu,
            "eta_storage": r.eta_storage,
            "eta_retrieval": r.eta_retrieval,
            "C_in": p_in.C,
            "C_out": p_out.C,
            "scenario": self.cfg.model.scenario,
            "warnings": list(r.warnings),
        }

    def sweep(self, workers=None):
        res = sweep(self.cfg, workers)
        self.csv_file("sweep.csv", ["C_in", "C_out", "nu", "eta_storage", "eta_retrieval"], res.rows())
        self.meta["cell_wall_time_s"] = res.wall_time
        warnings = [f"cell {k} failed: {v}" for k, v in sorted(res.errors.items())]
        return {
            "C_in": res.C_in,
            "C_out": res.C_out,
            "nu": res.nu,
            "eta_storage": res.eta_storage,
            "eta_retrieval": res.eta_retrieval,
            "failed_cells": sorted(res.errors),
            "scenario": self.cfg.model.scenario,
            "warnings": warnings,
        }

    def optimize(self):
        from .modes import optimal_retrieval_mode, optimal_storage_mode

        p_in, p_out, _ = build_params(self.cfg)
        s = optimal_storage_mode(p_in, self.cfg.grid)
        r = optimal_retrieval_mode(p_out, self.cfg.grid)
        self.grid_file("storage_mode.qmemgrid", s.mode.values)
        self.grid_file("retrieval_mode.qmemgrid", r.mode.values)
        warnings = [f"{n} iteration did not converge" for n, m in (("storage", s), ("retrieval", r)) if not m.converged]
        return {
            name: {"sigma": m.sigma, "efficiency": m.efficiency, "iterations": m.iterations,
                   "residual": m.residual, "converged": m.converged, "gap_ratio": m.gap_ratio}
            for name, m in (("storage", s), ("retrieval", r))
        } | {"warnings": warnings}

    # -- two components
    def multimode(self):
        from .multimode import MultimodeParams, TwoModeGeometry, mixing_report, two_mode_demo

        mm = self.cfg.multimode
        grid = self.cfg.grid
        geo = TwoModeGeometry.build(mm.theta_deg, mm.theta_r_deg, mm.length_m, _preset(self.cfg))
        r = two_mode_demo(grid, geo, mm.C_m, mm.q, mm.eps_width, mm.x_width)
        for j, comp in ((1, r.retrieved.a1), (2, r.retrieved.a2)):
            self.grid_file(f"output_a{j}.qmemgrid", comp.values, component=j)
            kx, power = r.spectra[f"a{j}"]
            self.csv_file(f"spectrum_a{j}.csv", ["k_x", "intensity"], zip(kx, power))
        self.grid_file("spin_wave.qmemgrid", r.stored.b.values)
        summary = {
            "peak_angles_deg": r.peak_angles_deg,
            "angle_bin_deg": r.angle_bin_deg,
            "storage_efficiency": r.storage_efficiency,
            "band_energies": r.band_energies,
            "p": geo.store_p(),
            "warnings": [],
        }
        if mm.mixing:
            mp = MultimodeParams.dimensionless(mm.C_m, p=geo.store_p(), q=mm.q)
            a = make_gaussian_input(grid, 0.5, mm.eps_width, mm.x_width)
            rep = mixing_report(mp, grid, a)
            summary["mixing"] = {"fraction": rep.departure, "band_leakage": rep.band_leakage,
                                 "cross_signal": rep.cross_signal}
        return summary

    def physical(self):
        from .design import DesignInput, design_report

        d = self.cfg.design
        inp = DesignInput(
            preset=_preset(self.cfg), pulse_T=d.pulse_s, L=d.length_m, A=d.area_m2, T_e=d.temperature_k,
            t_s=d.storage_time_s, delta_max=TWO_PI * d.delta_max_hz, F_min=d.F_min,
        )
        rep = design_report(inp, d.margin, (d.window_low, d.window_high)).to_dict()
        failed = [c["name"] for c in rep["constraints"]["constraints"] if not c["passed"]]
        rep["warnings"] = [f"constraint not satisfied: {n}" for n in failed]
        return rep


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmem", description="Lambda-ensemble quantum memory simulator")
    ap.add_argument("--config", type=Path, help="INI configuration file")
    ap.add_argument("--out", type=Path, help=f"output directory (default: ${OUT_ENV} or ./qmem_out)")
    ap.add_argument("--preset", help="physical preset name")
    ap.add_argument("--workers", type=int, help="parallel workers for sweeps (default: all cores)")
    ap.add_argument("--strict", action="store_true", help="treat unknown config keys as errors")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("mode", choices=MODES)
    return ap


def _resolve_out(args, cfg: RunConfig) -> Path:
    raw = args.out or cfg.out or os.environ.get(OUT_ENV) or "qmem_out"
    out = Path(raw)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as e:
        raise ConfigError(f"output directory {out} is not writable: {e.strerror}") from None
    return out


def execute(cfg: RunConfig, out: Path, workers=None) -> dict:
    run = Run(cfg, out)
    t0 = time.perf_counter()
    summary = run.sweep(workers) if cfg.mode == "sweep" else getattr(run, cfg.mode)()
    summary = {"mode": cfg.mode, "version": __version__, **summary}
    summary["warnings"] = list(cfg.warnings) + list(summary.get("warnings", []))
    if run.wants("json"):
        qio.write_json(out / "summary.json", summary)
    meta = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - t0,
        "argv": sys.argv,
        **run.meta,
    }
    qio.write_json(out / "metadata.json", meta)
    return summary


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = load_config(args.config, strict=args.strict) if args.config else RunConfig()
        cfg = replace(cfg, mode=args.mode)
        if args.preset:
            cfg = replace(cfg, model=replace(cfg.model, preset=args.preset))
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg = replace(cfg, workers=args.workers)
        _preset(cfg)  # unknown names fail before any work
        out = _resolve_out(args, cfg)
    except (ConfigError, ParameterError, GridError) as e:
        print(f"qmem: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for w in cfg.warnings:
        print(f"qmem: warning: {w}", file=sys.stderr)
    try:
        summary = execute(cfg, out, cfg.workers or None)
    except (ConfigError, ParameterError, GridError) as e:
        print(f"qmem: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, OSError, RuntimeError) as e:
        print(f"qmem: run failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    sys.stdout.write(qio.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
