"""Job configuration files.

A job file is INI-style text.  Keys are case-sensitive; every numeric value
may be an expression using ``pi``, ``e``, ``sqrt2`` and the ``[params]`` names.
Vector-valued keys take three comma-separated expressions.

    [job]        label, frame_mode (frenet | darboux), r
    [params]     name = constant expression (optional, evaluated in order)
    [spine]      source = curve (default): x, y, z in u; u_min, u_max (optional)
                 source = kappa: kappa (in u), u0, u_min, u_max, nodes (optional)
    [frame]      darboux mode only
                 source = direct: T, Y, U, kg, kn, taug (in u); validate = true | false
                 source = host: X (in s, t), s, t (in u)
                 source = frenet: theta (in u)
                 source = integrated: kg, kn, taug, u0, u_min, u_max
    [grid]       u_min, u_max, n_u, v_min, v_max, n_v
    [tube_grid]  [focal_grid]  optional per-sheet overrides of [grid] keys
    [outputs]    tube_mesh, focal_mesh, fields_csv, report_json (true | false); format (obj | ply)
    [tolerances] any field of tubefocal.tubes.Tolerances
    [anchors]    sheet.quantity = u, v, expected     e.g.  focal.H = 0, 0, -0.25
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import framekit as fk
from .. import spines
from .. import tubes as tb
from ..exprcurve import CurveDef, ExpressionError, evaluate, parse_expr
from ..theorems import QUANTITIES, Grid, TubeSpec

GRID_KEYS = ("u_min", "u_max", "n_u", "v_min", "v_max", "n_v")
OUTPUT_KEYS = ("tube_mesh", "focal_mesh", "fields_csv", "report_json")


class ConfigParseError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ConfigExpressionError(ConfigParseError, ExpressionError):
    """A malformed expression in a config field; catchable as either parent."""


def _bad(path: str, exc: Exception) -> ConfigParseError:
    cls = ConfigExpressionError if isinstance(exc, ExpressionError) else ConfigParseError
    return cls(path, str(exc))


@dataclass(frozen=True)
class Anchor:
    sheet: str
    quantity: str
    u: float
    v: float
    expected: float
    text: str


@dataclass
class JobConfig:
    label: str
    frame_mode: str
    r: float
    spec: TubeSpec
    tube_grid: Grid
    focal_grid: Grid
    outputs: dict
    mesh_format: str
    tolerances: tb.Tolerances
    anchors: list = field(default_factory=list)
    source: str = ""
    sha256: str = ""
    validate_frame: bool = True


class _Reader:
    def __init__(self, cp: configparser.ConfigParser):
        self.cp = cp
        self.constants: dict = {}

    def has(self, section, key=None):
        if key is None:
            return self.cp.has_section(section)
        return self.cp.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.cp.has_option(section, key):
            if default is not None:
                return default
            raise ConfigParseError(f"{section}.{key}", "missing")
        return self.cp.get(section, key).strip()

    def tree(self, section, key, variables=("u",), default=None):
        text = self.raw(section, key, default)
        try:
            return parse_expr(text, variables, self.constants)
        except ExpressionError as exc:
            raise _bad(f"{section}.{key}", exc) from exc

    def number(self, section, key, default=None):
        text = self.raw(section, key, None if default is None else repr(default))
        try:
            val = float(evaluate(parse_expr(text, (), self.constants), {}))
        except (ExpressionError, ValueError) as exc:
            raise _bad(f"{section}.{key}", exc) from exc
        if not np.isfinite(val):
            raise ConfigParseError(f"{section}.{key}", "not finite")
        return val

    def integer(self, section, key, default=None):
        val = self.number(section, key, default)
        if val != int(val):
            raise ConfigParseError(f"{section}.{key}", "must be an integer")
        return int(val)

    def flag(self, section, key, default: bool):
        if not self.cp.has_option(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError as exc:
            raise ConfigParseError(f"{section}.{key}", "expected true or false") from exc

    def vector(self, section, key, variables=("u",)):
        parts = self.raw(section, key).split(",")
        if len(parts) != 3:
            raise ConfigParseError(f"{section}.{key}", "expected three comma-separated expressions")
        try:
            return tuple(parse_expr(p, variables, self.constants) for p in parts)
        except ExpressionError as exc:
            raise _bad(f"{section}.{key}", exc) from exc


def _curve(rd: _Reader, section, key, domain, label=""):
    return CurveDef(rd.vector(section, key), domain, label)


def _domain(rd: _Reader, section):
    lo = rd.number(section, "u_min") if rd.has(section, "u_min") else -np.inf
    hi = rd.number(section, "u_max") if rd.has(section, "u_max") else np.inf
    if not lo < hi:
        raise ConfigParseError(f"{section}.u_min", "u_min must be below u_max")
    return (lo, hi)


def _spine_curve(rd: _Reader, label):
    source = rd.raw("spine", "source", "curve")
    if source == "curve":
        dom = _domain(rd, "spine")
        comps = tuple(rd.tree("spine", k) for k in ("x", "y", "z"))
        return CurveDef(comps, dom, label)
    if source == "kappa":
        dom = _domain(rd, "spine")
        if not all(np.isfinite(dom)):
            raise ConfigParseError("spine.u_min", "a kappa spine needs a finite span")
        u0 = rd.number("spine", "u0", dom[0])
        nodes = rd.integer("spine", "nodes", 64)
        try:
            return spines.SampledSpine(rd.tree("spine", "kappa"), u0, dom, nodes, label)
        except (ValueError, spines.QuadratureFailure) as exc:
            raise ConfigParseError("spine.kappa", str(exc)) from exc
    raise ConfigParseError("spine.source", f"unknown source {source!r}")


def _darboux_source(rd: _Reader, curve, label):
    if not rd.has("frame"):
        raise ConfigParseError("frame", "darboux mode needs a [frame] section")
    source = rd.raw("frame", "source")
    if source == "direct":
        dom = curve.domain
        return fk.DirectDarboux(curve, _curve(rd, "frame", "T", dom), _curve(rd, "frame", "Y", dom),
                                _curve(rd, "frame", "U", dom), rd.tree("frame", "kg"), rd.tree("frame", "kn"),
                                rd.tree("frame", "taug"))
    if source == "host":
        host = fk.HostSurfaceDef(rd.vector("frame", "X", ("s", "t")), rd.tree("frame", "s"), rd.tree("frame", "t"),
                                 _domain(rd, "spine"), label)
        return fk.HostDarboux(host)
    if source == "frenet":
        return fk.FrenetDarboux(curve, rd.tree("frame", "theta"))
    if source == "integrated":
        dom = _domain(rd, "frame")
        return spines.IntegratedDarboux(rd.tree("frame", "kg"), rd.tree("frame", "kn"), rd.tree("frame", "taug"),
                                        rd.number("frame", "u0", dom[0]), dom)
    raise ConfigParseError("frame.source", f"unknown source {source!r}")


def _grid(rd: _Reader, section):
    vals, where = {}, {}
    for k in GRID_KEYS:
        where[k] = section if rd.has(section, k) else "grid"
        vals[k] = rd.integer(where[k], k) if k.startswith("n_") else rd.number(where[k], k)
    for k in ("n_u", "n_v"):
        if vals[k] < 2:
            raise ConfigParseError(f"{where[k]}.{k}", "needs at least 2 nodes")
    for a, b in (("u_min", "u_max"), ("v_min", "v_max")):
        if not vals[a] < vals[b]:
            raise ConfigParseError(f"{where[a]}.{a}", f"{a} must be below {b}")
    return Grid(**vals)


def _anchors(rd: _Reader):
    out = []
    if not rd.has("anchors"):
        return out
    for key in rd.cp.options("anchors"):
        sheet, _, qty = key.partition(".")
        if sheet not in ("tube", "focal") or qty not in QUANTITIES:
            raise ConfigParseError(f"anchors.{key}", "expected tube.<quantity> or focal.<quantity>")
        parts = rd.raw("anchors", key).split(",")
        if len(parts) != 3:
            raise ConfigParseError(f"anchors.{key}", "expected u, v, expected")
        try:
            u, v, want = (float(evaluate(parse_expr(p, (), rd.constants), {})) for p in parts)
        except (ExpressionError, ValueError) as exc:
            raise _bad(f"anchors.{key}", exc) from exc
        out.append(Anchor(sheet, qty, u, v, want, rd.raw("anchors", key)))
    return out


def parse_config(text: str, source: str = "<string>", overrides: dict | None = None) -> JobConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source)
    except configparser.Error as exc:
        raise ConfigParseError("<file>", str(exc)) from exc
    rd = _Reader(cp)
    if rd.has("params"):
        for k in cp.options("params"):
            rd.constants[k] = rd.number("params", k)
    label = rd.raw("job", "label", Path(source).stem or "job")
    mode = rd.raw("job", "frame_mode").lower()
    if mode not in ("frenet", "darboux"):
        raise ConfigParseError("job.frame_mode", f"expected frenet or darboux, got {mode!r}")
    r = rd.number("job", "r")
    if not r > 0:
        raise ConfigParseError("job.r", "tube radius must be positive")

    tol = tb.DEFAULT_TOL
    if rd.has("tolerances"):
        vals = {k: rd.number("tolerances", k) for k in cp.options("tolerances")}
        try:
            tol = tol.override(**vals)
        except KeyError as exc:
            raise ConfigParseError("tolerances", str(exc)) from exc
    if overrides:
        try:
            tol = tol.override(**overrides)
        except KeyError as exc:
            raise ConfigParseError("tolerances", str(exc)) from exc

    tube_grid, focal_grid = _grid(rd, "tube_grid"), _grid(rd, "focal_grid")
    curve = _spine_curve(rd, label)
    validate = True
    if mode == "frenet":
        span = (min(tube_grid.u_min, focal_grid.u_min), max(tube_grid.u_max, focal_grid.u_max))
        try:
            spine = tb.FrenetSpine(curve, tol, span)
        except tb.NotPlanar as exc:
            raise ConfigParseError("spine", str(exc)) from exc
    else:
        spine = _darboux_source(rd, curve, label)
        validate = rd.flag("frame", "validate", True)
        if validate and isinstance(spine, fk.DirectDarboux):
            lo = min(tube_grid.u_min, focal_grid.u_min)
            hi = max(tube_grid.u_max, focal_grid.u_max)
            try:
                spine.validate(np.linspace(lo, hi, 200), tol.frame)
            except fk.FrameInconsistent as exc:
                raise ConfigParseError("frame", str(exc)) from exc

    outputs = {k: rd.flag("outputs", k, True) for k in OUTPUT_KEYS}
    fmt = rd.raw("outputs", "format", "ply").lower()
    if fmt not in ("obj", "ply"):
        raise ConfigParseError("outputs.format", f"expected obj or ply, got {fmt!r}")
    spec = TubeSpec(mode, spine, r, tol, label)
    return JobConfig(label, mode, r, spec, tube_grid, focal_grid, outputs, fmt, tol, _anchors(rd), source,
                     hashlib.sha256(text.encode()).hexdigest(), validate)


def load_config(path, overrides: dict | None = None) -> JobConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigParseError(str(p), f"cannot read: {exc.strerror}") from exc
    return parse_config(text, str(p), overrides)
