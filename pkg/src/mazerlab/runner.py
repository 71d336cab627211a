"""Scenario execution and artifact emission.

All results are computed in memory first and only then written, each file
atomically (temp file + rename), so a failed run leaves no partial
artifacts behind.  CSV cells use Python's shortest round-trip float
formatting; a manifest records the config hash, unit system, and library
versions for every run.
"""

import csv
import hashlib
import json
import math
import os
import platform
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy

from .claimed import REGIONS, resonant_emission_probability
from .config import RunConfig
from .errors import ConfigError
from .model import MesaMode, make_params
from .observables import aggregate_inversion
from .solver import Grid, flux_probabilities, init_wavepacket, propagate, stationary_scatter
from .verify import claimed_residual, separability_audit

__all__ = ["run", "resolve_jobs"]

_CHANNELS = ("+", "-")


def resolve_jobs(requested: Optional[int] = None) -> int:
    """--jobs argument, MAZERLAB_JOBS fallback, then processor count."""
    if requested is not None:
        if requested < 1:
            raise ConfigError(f"jobs must be >= 1, got {requested}")
        return requested
    env = os.environ.get("MAZERLAB_JOBS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"MAZERLAB_JOBS must be an integer, got {env!r}")
        if value < 1:
            raise ConfigError(f"MAZERLAB_JOBS must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


# =====================================================================
# atomic artifact writers
# =====================================================================

def _atomic_text(path: str, write_body: Callable[[Any], None]) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    def body(fh):
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)

    _atomic_text(path, body)


def _write_svg(path: str, draw: Callable[[Any], None]) -> str:
    """Render one figure deterministically (fixed hash salt, no date stamp)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "mazerlab"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        try:
            draw(ax)
            fig.tight_layout()
            directory = os.path.dirname(path) or "."
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
            os.close(fd)
            try:
                fig.savefig(tmp, format="svg", metadata={"Date": None})
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        finally:
            plt.close(fig)
    return matplotlib.__version__


# =====================================================================
# scenario bodies: each returns (artifacts, extras for the manifest)
# =====================================================================

def _single_sector(config: RunConfig) -> int:
    if len(config.sectors) != 1:
        raise ConfigError(
            f"scenario {config.scenario!r} runs one photon sector at a time; "
            f"got {len(config.sectors)}")
    return config.sectors[0].n


def _scenario_residual(config: RunConfig, jobs: int):
    n = _single_sector(config)
    report = claimed_residual(config.k, n, config.params)
    rows = []
    for region in REGIONS:
        for channel in _CHANNELS:
            rows.append([config.k, config.params.delta, n, region, channel,
                         report.norms[(region, channel)],
                         report.alt_norms[(region, channel)]])
    header = ["k", "delta", "n", "region", "channel",
              "residual_norm", "alt_residual_norm"]
    files = {"residual.csv": (header, rows)}
    extras = {"energy": report.energy, "alt_energy": report.alt_energy,
              "window": report.window, "max_residual_norm": report.max_norm}
    return files, {}, extras


def _sweep_task(args) -> List[List[Any]]:
    lam, delta, omega, length, k, n = args
    params = make_params(lam, delta, omega, length)
    report = claimed_residual(k, n, params)
    return [[delta, region, channel, report.norms[(region, channel)]]
            for region in REGIONS for channel in _CHANNELS]


def _scenario_residual_sweep(config: RunConfig, jobs: int):
    n = _single_sector(config)
    p = config.params
    tasks = [(p.lam, d, p.omega, p.cavity_length, config.k, n)
             for d in config.deltas]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            chunks = list(pool.map(_sweep_task, tasks))
    else:
        chunks = [_sweep_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    header = ["delta", "region", "channel", "residual_norm"]
    files = {"residual-sweep.csv": (header, rows)}

    def draw(ax):
        per_delta = [max(row[3] for row in chunk) for chunk in chunks]
        ax.plot(list(config.deltas), per_delta, marker="o")
        ax.set_xlabel("detuning")
        ax.set_ylabel("max residual norm")
        ax.set_yscale("log")

    plots = {"residual-sweep.svg": draw} if config.svg else {}
    return files, plots, {"k": config.k, "sector": n}


def _scenario_stationary(config: RunConfig, jobs: int):
    rows = []
    for sector in config.sectors:
        sol = stationary_scatter(config.k, sector.n, config.params)
        probs = flux_probabilities(sol)
        rows.append([sector.n, sector.weight, config.k, config.params.delta,
                     probs["R_e"], probs["R_g"], probs["T_e"], probs["T_g"],
                     probs["P_emission"], probs["unitarity_defect"],
                     int(sol.closed_exit)])
    header = ["n", "weight", "k", "delta", "R_e", "R_g", "T_e", "T_g",
              "P_emission", "unitarity_defect", "closed_exit"]
    files = {"stationary.csv": (header, rows)}
    weighted = math.fsum(s.weight * row[8] for s, row in zip(config.sectors, rows))
    return files, {}, {"weighted_P_emission": weighted}


def _scenario_propagate(config: RunConfig, jobs: int):
    opts = config.grid_options
    grid = Grid.around_cavity(config.params.cavity_length, dz=opts.dz,
                              pad_left=opts.pad_left, pad_right=opts.pad_right)
    mode = MesaMode(config.params.cavity_length)
    t_opts = config.time_options
    trajectories = []
    for sector in config.sectors:
        spec = replace(config.packet, n=sector.n)
        field = init_wavepacket(spec, grid, config.params)
        trajectories.append(propagate(
            field, config.params, mode, t_opts.dt, t_opts.n_steps,
            snapshot_stride=t_opts.snapshot_stride,
            norm_tolerance=t_opts.norm_tolerance))
    series = aggregate_inversion(trajectories, [s.weight for s in config.sectors])
    rows = [list(row) for row in series.rows()]
    header = ["t", "norm", "P_e", "P_g", "inversion"]
    files = {"propagate.csv": (header, rows)}

    def draw(ax):
        ax.plot(series.times, series.inversion)
        ax.set_xlabel("time")
        ax.set_ylabel("inversion W(t)")
        ax.set_ylim(-1.05, 1.05)

    plots = {"propagate.svg": draw} if config.svg else {}
    extras = {"grid_points": grid.npoints, "final_inversion": float(series.inversion[-1])}
    return files, plots, extras


def _scenario_audit(config: RunConfig, jobs: int):
    opts = config.audit_options
    deltas = np.linspace(opts.delta_min, opts.delta_max, opts.points)
    rows = []
    audits = []
    for sector in config.sectors:
        audit = separability_audit(sector.n, config.params, deltas)
        audits.append(audit)
        for i, d in enumerate(audit.deltas):
            rows.append([sector.n, float(d),
                         float(audit.dressed_inside[i]),
                         float(audit.dressed_outside[i]),
                         float(audit.bare_inside[i]),
                         float(audit.bare_outside[i]),
                         float(audit.predicted_dressed_outside[i])])
    header = ["n", "delta", "dressed_inside", "dressed_outside",
              "bare_inside", "bare_outside", "predicted_dressed_outside"]
    files = {"audit.csv": (header, rows)}

    plots = {}
    if config.svg:
        for audit in audits:
            def draw(ax, a=audit):
                ax.plot(a.deltas, a.dressed_inside, label="dressed inside")
                ax.plot(a.deltas, a.dressed_outside, label="dressed outside")
                ax.plot(a.deltas, a.bare_inside, label="bare inside")
                ax.plot(a.deltas, a.bare_outside, label="bare outside")
                ax.set_xlabel("detuning")
                ax.set_ylabel("off-diagonal coupling")
                ax.legend()
            plots[f"audit-n{audit.n}.svg"] = draw
    worst = max(a.max_closed_form_defect for a in audits)
    return files, plots, {"max_closed_form_defect": worst}


def _scenario_resonant(config: RunConfig, jobs: int):
    rows = []
    for sector in config.sectors:
        probs = resonant_emission_probability(config.k, sector.n, config.params)
        rows.append([sector.n, sector.weight, config.k, probs["R_e"],
                     probs["R_g"], probs["T_e"], probs["T_g"],
                     probs["P_emission"]])
    header = ["n", "weight", "k", "R_e", "R_g", "T_e", "T_g", "P_emission"]
    files = {"resonant-probabilities.csv": (header, rows)}
    weighted = math.fsum(s.weight * row[7] for s, row in zip(config.sectors, rows))
    return files, {}, {"weighted_P_emission": weighted}


_SCENARIO_BODIES = {
    "residual": _scenario_residual,
    "residual-sweep": _scenario_residual_sweep,
    "stationary": _scenario_stationary,
    "propagate": _scenario_propagate,
    "audit": _scenario_audit,
    "resonant-probabilities": _scenario_resonant,
}


# =====================================================================
# entry point
# =====================================================================

def run(config: RunConfig, jobs: Optional[int] = None) -> Dict[str, Any]:
    """Execute one scenario; write CSV/manifest (and SVG if enabled).

    Returns the manifest mapping, whose "artifacts" entries list every
    file written together with its row count.
    """
    n_jobs = resolve_jobs(jobs)
    started = time.perf_counter()
    files, plots, extras = _SCENARIO_BODIES[config.scenario](config, n_jobs)

    os.makedirs(config.output_dir, exist_ok=True)
    artifacts = []
    for name, (header, rows) in files.items():
        path = os.path.join(config.output_dir, name)
        _write_csv(path, header, rows)
        artifacts.append({"path": name, "rows": len(rows)})

    mpl_version = None
    for name, draw in plots.items():
        path = os.path.join(config.output_dir, name)
        mpl_version = _write_svg(path, draw)
        artifacts.append({"path": name})

    blob = json.dumps(config.resolved, sort_keys=True, separators=(",", ":"))
    versions = {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    if mpl_version is not None:
        versions["matplotlib"] = mpl_version
    from . import __version__
    versions["mazerlab"] = __version__

    manifest = {
        "scenario": config.scenario,
        "config": config.resolved,
        "config_sha256": hashlib.sha256(blob.encode("utf-8")).hexdigest(),
        "unit_system": {
            "hbar": 1.0,
            "mass": "2M = 1 (kinetic term -d^2/dz^2)",
            "energy_unit": "coupling lambda",
            "length_unit": "1/gamma with gamma = sqrt(lambda)",
        },
        "versions": versions,
        "jobs": n_jobs,
        "wall_time_s": round(time.perf_counter() - started, 6),
        "artifacts": artifacts,
    }
    manifest.update({"scenario_details": extras})

    def manifest_body(fh):
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _atomic_text(os.path.join(config.output_dir, "manifest.json"), manifest_body)
    return manifest
