"""Verification reports: theorem checks, frame residuals and point anchors as JSON."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import __version__
from .. import framekit as fk
from .. import surfkit as sk
from ..theorems import Check, TheoremReport, _check, anchor_value, default_workers, verify_theorems
from .config import JobConfig

FRAME_SAMPLES = 200
FRAME_RESIDUAL_TOL = 1e-6


def _span(cfg: JobConfig):
    return (min(cfg.tube_grid.u_min, cfg.focal_grid.u_min), max(cfg.tube_grid.u_max, cfg.focal_grid.u_max))


def frame_checks(cfg: JobConfig) -> list:
    """Frame-equation residuals on evenly spaced samples, by jets and by finite differences."""
    lo, hi = _span(cfg)
    u = np.linspace(lo, hi, FRAME_SAMPLES)
    spine = cfg.spec.spine
    out = []
    if cfg.frame_mode == "frenet":
        fj = spine.frame(u, 1)
        rows = fk.frenet_residuals(fj)
        speed = fk.check_unit_speed(spine.curve, FRAME_SAMPLES, cfg.tolerances.unit_speed, (lo, hi))
        out.append(_check("frame.unit_speed", speed.max_dev, cfg.tolerances.unit_speed))

        def values(x):
            f = spine.frame(x, 0)
            return f.T.value, f.N1.value, f.N2.value, f.kappa.value, 0.0, f.tau.value
    else:
        dj = spine.frame(u, 1)
        rows = fk.darboux_residuals(dj.T.value, dj.Y.value, dj.U.value, dj.kg.value, dj.kn.value, dj.taug.value,
                                    dj.T.d().value, dj.Y.d().value, dj.U.d().value)
        ortho = np.max(fk.orthonormality_error(dj.T.value, dj.Y.value, dj.U.value))
        out.append(_check("frame.orthonormality", ortho, cfg.tolerances.frame))

        def values(x):
            d = spine.frame(x, 0)
            return d.T.value, d.Y.value, d.U.value, d.kg.value, d.kn.value, d.taug.value
    out.append(_check("frame.rows_jet", max(float(np.max(r)) for r in rows), FRAME_RESIDUAL_TOL,
                      note=f"{FRAME_SAMPLES} samples on [{lo:g}, {hi:g}]"))
    h = cfg.tolerances.fd_step
    inner = u[(u - 4 * h >= lo) & (u + 4 * h <= hi)]
    fd = max(max(float(r) for r in fk.fd_frame_residuals(values, float(x), h)) for x in inner)
    out.append(_check("frame.rows_fd", fd, FRAME_RESIDUAL_TOL, note="frame derivatives by finite differences"))
    return out


def anchor_checks(cfg: JobConfig) -> list:
    out = []
    tol = cfg.tolerances.anchor
    for a in cfg.anchors:
        name = f"anchor.{a.sheet}.{a.quantity}({a.u:g},{a.v:g})"
        try:
            closed, numeric = anchor_value(cfg.spec, a.sheet, a.quantity, a.u, a.v)
        except (sk.SingularPoint, fk.FrameError, ValueError) as exc:
            out.append(Check(name, float("nan"), tol, "<=", "fail", f"{type(exc).__name__}: {exc}"))
            continue
        dev = max(abs(closed - a.expected), abs(numeric - a.expected))
        out.append(_check(name, dev, tol, note=f"expected {a.expected!r}, closed {closed!r}, numeric {numeric!r}"))
    return out


def build_report(cfg: JobConfig, workers: int | None = None) -> TheoremReport:
    workers = default_workers() if workers is None else workers
    rep = verify_theorems(cfg.spec, cfg.tube_grid, cfg.focal_grid, workers)
    rep.checks = frame_checks(cfg) + rep.checks + anchor_checks(cfg)
    return rep


def report_json(cfg: JobConfig, rep: TheoremReport, timestamp: str | None = None) -> str:
    """Deterministic JSON text; the timestamp sits alone on one line."""
    body = rep.to_dict()
    doc = {
        "tool": "tubefocal",
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "provenance": {"config": Path(cfg.source).name, "config_sha256": cfg.sha256, "tool_version": __version__},
        **body,
        "grids": {"tube": dict(vars(cfg.tube_grid)), "focal": dict(vars(cfg.focal_grid))},
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def run_verify(cfg: JobConfig, out_dir=None, workers: int | None = None):
    """Build the report, optionally write ``<label>_report.json``; returns (report, path or None)."""
    rep = build_report(cfg, workers)
    path = None
    if out_dir is not None:
        path = Path(out_dir) / f"{cfg.label}_report.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report_json(cfg, rep))
    return rep, path
