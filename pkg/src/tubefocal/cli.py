"""Command-line entry point: ``tubefocal <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import framekit as fk
from . import spines
from .exprcurve import ExpressionError, evaluate, parse_expr
from .pipeline import ConfigParseError, EmptyMesh, export_mesh, load_config, run_verify, sample_surface, write_fields_csv
from .pipeline.export import IoError, write_table_csv
from .theorems import default_workers

EXAMPLES = ("example1.cfg", "example2.cfg")

log = logging.getLogger("tubefocal")


def bundled_config(name: str) -> Path:
    return Path(str(resources.files("tubefocal") / "data" / name))


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigParseError(f"--tol-override {item}", "expected key=value")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigParseError(f"--tol-override {item}", "value is not a number") from exc
    return out


def _load(args):
    return load_config(args.config, _overrides(args.tol_override))


def _build(cfg, out: Path, fmt: str | None, workers: int) -> list:
    out.mkdir(parents=True, exist_ok=True)
    fmt = fmt or cfg.mesh_format
    meshes, written = {}, []
    for sheet, grid in (("tube", cfg.tube_grid), ("focal", cfg.focal_grid)):
        if not cfg.outputs[f"{sheet}_mesh"] and not cfg.outputs["fields_csv"]:
            continue
        try:
            mesh = sample_surface(cfg.spec, grid, sheet, workers)
        except EmptyMesh as exc:
            log.warning("%s: %s", cfg.label, exc)
            continue
        meshes[sheet] = mesh
        if cfg.outputs[f"{sheet}_mesh"]:
            written.append(export_mesh(mesh, out / f"{cfg.label}_{sheet}.{fmt}", fmt))
    if cfg.outputs["fields_csv"] and meshes:
        written.append(write_fields_csv(meshes, out / f"{cfg.label}_fields.csv"))
    return written


def _summary(rep) -> str:
    failed = rep.failures()
    n = sum(c.status == "pass" for c in rep.checks)
    head = f"{rep.label}: {'PASS' if rep.passed else 'FAIL'} ({n} passed, {len(failed)} failed)"
    return head + ("".join(f"\n  failed: {name}" for name in failed))


def cmd_build(args) -> int:
    cfg = _load(args)
    for p in _build(cfg, Path(args.out), args.format, args.workers):
        print(p)
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    rep, path = run_verify(cfg, Path(args.out), args.workers)
    print(_summary(rep))
    print(path)
    return 0 if rep.passed else 1


def cmd_reproduce(args) -> int:
    out = Path(args.out)
    ok = True
    for name in EXAMPLES:
        cfg = load_config(bundled_config(name), _overrides(args.tol_override))
        for p in _build(cfg, out, args.format, args.workers):
            print(p)
        rep, path = run_verify(cfg, out, args.workers)
        print(path)
        print(_summary(rep))
        ok &= rep.passed
    return 0 if ok else 1


def cmd_curve_info(args) -> int:
    cfg = _load(args)
    lo = min(cfg.tube_grid.u_min, cfg.focal_grid.u_min)
    hi = max(cfg.tube_grid.u_max, cfg.focal_grid.u_max)
    u = np.linspace(lo, hi, args.samples)
    spine = cfg.spec.spine
    if cfg.frame_mode == "frenet":
        fj = spine.frame(u, 1)
        res = fk.frenet_residuals(fj)
        vecs = (fj.gamma, fj.T, fj.N1, fj.N2)
        names = ("gamma", "T", "N1", "N2")
        scal = {"kappa": fj.kappa.value, "tau": fj.tau.value, "dkappa": fj.kappa.deriv(1)}
    else:
        dj = spine.frame(u, 1)
        res = fk.darboux_residuals(dj.T.value, dj.Y.value, dj.U.value, dj.kg.value, dj.kn.value, dj.taug.value,
                                   dj.T.d().value, dj.Y.d().value, dj.U.d().value)
        vecs = (dj.gamma, dj.T, dj.Y, dj.U)
        names = ("gamma", "T", "Y", "U")
        scal = {"kg": dj.kg.value, "kn": dj.kn.value, "taug": dj.taug.value}
    header = ["u"] + [f"{n}_{c}" for n in names for c in "xyz"] + list(scal) + ["residual_1", "residual_2", "residual_3"]
    rows = []
    for i in range(len(u)):
        row = [float(u[i])] + [float(x) for vj in vecs for x in vj.value[i]]
        row += [float(s[i]) for s in scal.values()] + [float(r[i]) for r in res]
        rows.append(row)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    print(write_table_csv(header, rows, out))
    return 0


def cmd_spine(args) -> int:
    if args.config:
        cfg = _load(args)
        sp = cfg.spec.spine.curve if hasattr(cfg.spec.spine, "curve") else cfg.spec.spine
        if not isinstance(sp, spines.SampledSpine):
            raise ConfigParseError("spine.source", "spine-from-kappa needs a [spine] section with source = kappa")
    else:
        if args.kappa is None or args.u_min is None or args.u_max is None:
            raise ConfigParseError("arguments", "give --config, or --kappa with --u-min and --u-max")
        u0 = args.u_min if args.u0 is None else args.u0
        sp = spines.spine_from_curvature(parse_expr(args.kappa), u0, (args.u_min, args.u_max), args.nodes)
    lo, hi = sp.domain
    u = np.linspace(lo, hi, args.samples)
    fj = fk.frenet_jets(sp, u, 1)
    pos, theta, kap = fj.gamma.value, sp.theta(u), fj.kappa.value
    kappa_in = np.broadcast_to(evaluate(sp.kappa, {"u": u}), u.shape)
    header = ["u", "x", "y", "z", "theta", "kappa_recomputed", "kappa_input"]
    rows = [[float(u[i]), *map(float, pos[i]), float(theta[i]), float(kap[i]), float(kappa_in[i])]
            for i in range(len(u))]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    print(write_table_csv(header, rows, out))
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tubefocal", description="Tubular surfaces, focal sheets and their verification.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="job file")
        sp.add_argument("--tol-override", action="append", metavar="KEY=VALUE", help="override a tolerance")
        sp.add_argument("--workers", type=int, default=default_workers(),
                        help="worker threads (default: TUBEFOCAL_THREADS or CPU count)")

    b = sub.add_parser("build", help="sample and export meshes")
    common(b)
    b.add_argument("--out", default=".")
    b.add_argument("--format", choices=("obj", "ply"))
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="write a verification report; exit 1 on any failed check")
    common(v)
    v.add_argument("--out", default=".")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reproduce-examples", help="build and verify both bundled examples")
    common(r, config_required=False)
    r.add_argument("--out", default="examples_out")
    r.add_argument("--format", choices=("obj", "ply"))
    r.set_defaults(func=cmd_reproduce)

    c = sub.add_parser("curve-info", help="frame apparatus table as CSV")
    common(c)
    c.add_argument("--out", default="curve_info.csv")
    c.add_argument("--samples", type=int, default=200)
    c.set_defaults(func=cmd_curve_info)

    s = sub.add_parser("spine-from-kappa", help="integrate a planar spine from its curvature")
    common(s, config_required=False)
    s.add_argument("--kappa", help="curvature expression in u")
    s.add_argument("--u0", type=float)
    s.add_argument("--u-min", type=float)
    s.add_argument("--u-max", type=float)
    s.add_argument("--nodes", type=int, default=64)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--out", default="spine.csv")
    s.set_defaults(func=cmd_spine)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, ExpressionError, fk.FrameError, spines.QuadratureFailure, IoError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
