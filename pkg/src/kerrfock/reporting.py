"""CSV/JSON serialisation and the figure-reproduction data set."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    FIG2_GAMMAS,
    FIG3_DELTAS,
    FRINGE_POINTS,
    VISIBILITY_POINTS,
    PathChoice,
    SweepRow,
    SweepSpec,
    SweepVariable,
    distribution_report,
    sweep,
    visibility,
)
from .interferometer import Distribution, InterferometerConfig, Port, odd_probability_mass

SWEEP_COLUMNS = ("mean_n2", "mean_n3", "odd_mass_3", "total_mean", "tail_bound")


def fmt(value) -> str:
    """12 significant digits; integers stay integers."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if v == 0.0:
        v = 0.0  # drop the sign of -0.0
    return f"{v:.12g}"


def _json_value(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(fmt(value))
        return v if math.isfinite(v) else str(v)
    return value


def render(columns, rows, fmt_name: str = "csv", metadata: dict | None = None) -> str:
    if fmt_name == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()
    if fmt_name == "json":
        meta = {k: _json_value(v) for k, v in (metadata or {}).items()}
        meta["tool_version"] = __version__
        doc = {"metadata": meta,
               "data": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt_name!r}")


def config_metadata(cfg: InterferometerConfig) -> dict:
    return {"beta_mag": cfg.beta_mag, "theta": cfg.theta, "gamma3": cfg.gamma3,
            "transmission": cfg.bs.t, "reflection": cfg.bs.r,
            "cutoff": cfg.resolved_cutoff, "kerr_convention": cfg.convention.value}


def distribution_table(dist: Distribution, label: str = "n"):
    return (label, "probability"), list(zip(dist.support.tolist(), dist.probs.tolist()))


def sweep_table(rows: list[SweepRow], variable: SweepVariable, with_residual: bool = False):
    columns = (variable.value,) + SWEEP_COLUMNS
    table = []
    for r in rows:
        line = [r.value, r.mean_n2, r.mean_n3, r.odd_mass_3, r.total_mean, r.tail_bound]
        if with_residual:
            line.append(r.path_residual)
        table.append(line)
    if with_residual:
        columns += ("path_residual",)
    return columns, table


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def write_figures(outdir, workers: int = 1, fmt_name: str = "csv",
                  gamma_points: int = 21) -> list[Path]:
    """Write the fringe, visibility and photon-number-distribution data sets.

    Returns the written paths, in a fixed order.  Contents depend only on the
    arguments, never on ``workers``.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ext = fmt_name
    written: list[Path] = []
    manifest: dict[str, dict] = {}

    def emit(name, columns, rows, meta):
        p = outdir / f"{name}.{ext}"
        _write(p, render(columns, rows, fmt_name, meta))
        written.append(p)
        manifest[p.name] = {k: _json_value(v) for k, v in meta.items()}

    # fringes versus relative phase, and the conservation check along them
    base = InterferometerConfig(2.0, 0.0, 0.1)
    spec = SweepSpec(SweepVariable.THETA, 0.0, 2 * math.pi, FRINGE_POINTS, base)
    rows = sweep(spec, workers=workers)
    emit("fig1a_sweep_theta", *sweep_table(rows, SweepVariable.THETA),
         {**config_metadata(base), "figure": "1a", "path": "matrix"})

    # dark-port brightening and visibility decay versus Kerr strength
    base = InterferometerConfig(2.0, math.pi / 2, 0.0)
    spec = SweepSpec(SweepVariable.GAMMA3, 0.0, 1.0, gamma_points, base)
    rows = sweep(spec, workers=workers)
    emit("fig1b_sweep_gamma", *sweep_table(rows, SweepVariable.GAMMA3),
         {**config_metadata(base), "figure": "1b", "path": "matrix"})
    vis = [(float(g), visibility(float(g), base, VISIBILITY_POINTS, workers))
           for g in spec.values()]
    emit("fig1b_visibility", ("gamma3", "visibility"), vis,
         {**config_metadata(base), "figure": "1b", "theta_points": VISIBILITY_POINTS})

    # dark and bright port distributions across Kerr strengths
    for i, g in enumerate(FIG2_GAMMAS):
        cfg = InterferometerConfig(math.sqrt(6), math.pi / 2, g)
        for port in (Port.PORT_3, Port.PORT_2):
            dist = distribution_report(port, cfg, path=PathChoice.MATRIX)
            emit(f"fig2_port{int(port)}_panel{i}", *distribution_table(dist),
                 {**config_metadata(cfg), **dist.metadata, "figure": "2"})

    # dark port slightly off the optimum phase
    odd = []
    for i, delta in enumerate(FIG3_DELTAS):
        cfg = InterferometerConfig(2.0, math.pi / 2 + delta, 0.1)
        dist = distribution_report(Port.PORT_3, cfg, path=PathChoice.MATRIX)
        odd.append((delta, odd_probability_mass(dist)))
        emit(f"fig3_port3_delta{i}", *distribution_table(dist),
             {**config_metadata(cfg), **dist.metadata, "figure": "3", "delta": delta})
    emit("fig3_odd_mass", ("delta", "odd_mass_3"), odd,
         {**config_metadata(InterferometerConfig(2.0, math.pi / 2, 0.1)), "figure": "3"})

    p = outdir / "manifest.json"
    _write(p, json.dumps({"tool_version": __version__, "files": manifest},
                         indent=2, sort_keys=True) + "\n")
    written.append(p)
    return written
