"""Grid verification of the tube and focal-sheet results against the numeric oracle.

:func:`verify_theorems` evaluates a tube and its focal sheet on a uniform grid,
masks singular nodes, and compares every closed form with the generic surfkit
path.  Normals are matched per connected patch of regular nodes: the sign of
``<N_numeric, N_closed>`` at the first regular node of a patch is applied to
the whole patch, and any node disagreeing with it fails the orientation check.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from . import surfkit as sk
from . import tubes as tb
from .tubes import DEFAULT_TOL, Tolerances

FORM_NAMES = ("E", "F", "G", "l", "m", "n", "K", "H")
_ODD = {"l", "m", "n", "H"}  # flip with the normal


@dataclass(frozen=True)
class Grid:
    u_min: float
    u_max: float
    n_u: int
    v_min: float
    v_max: float
    n_v: int

    def __post_init__(self):
        if self.n_u < 2 or self.n_v < 2:
            raise ValueError("grid needs at least 2 nodes per direction")
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("grid ranges must be nonempty")

    def nodes(self):
        u = np.linspace(self.u_min, self.u_max, self.n_u)
        v = np.linspace(self.v_min, self.v_max, self.n_v)
        return np.meshgrid(u, v, indexing="ij")


@dataclass(frozen=True)
class TubeSpec:
    frame_mode: str  # "frenet" or "darboux"
    spine: object  # FrenetSpine, or a Darboux source with .frame()
    r: float
    tol: Tolerances = DEFAULT_TOL
    label: str = ""

    def __post_init__(self):
        if self.frame_mode not in ("frenet", "darboux"):
            raise ValueError(f"frame_mode must be frenet or darboux, not {self.frame_mode!r}")
        if not self.r > 0:
            raise ValueError("tube radius must be positive")

    def closed(self, which: str, u, v) -> tb.ClosedForms:
        with np.errstate(all="ignore"):
            if self.frame_mode == "frenet":
                return tb.tube_frenet(self.spine, self.r, u, v) if which == "tube" else tb.focal_frenet(self.spine, u, v)
            return tb.tube_darboux(self.spine, self.r, u, v) if which == "tube" else tb.focal_darboux(self.spine, u, v)

    def surface(self, which: str):
        if self.frame_mode == "frenet":
            return tb.FrenetTubeSurface(self.spine, self.r) if which == "tube" else tb.FrenetFocalSurface(self.spine)
        return tb.DarbouxTubeSurface(self.spine, self.r) if which == "tube" else tb.DarbouxFocalSurface(self.spine)

    def masks(self, which: str, u, v) -> dict:
        with np.errstate(all="ignore"):
            return tb.singularity_masks(self.frame_mode, which, self.spine, self.r if which == "tube" else None,
                                        u, v, self.tol)


# per-sheet evaluation ---------------------------------------------------------------


def default_workers() -> int:
    env = os.environ.get("TUBEFOCAL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_chunks(fn, u, v, workers):
    """Apply ``fn`` to contiguous chunks of flat point arrays and concatenate in order."""
    n = len(u)
    workers = max(1, min(workers, n // 64 or 1))
    if workers == 1:
        return fn(u, v)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    parts = list(zip(bounds[:-1], bounds[1:]))
    with ThreadPoolExecutor(workers) as pool:
        outs = list(pool.map(lambda ab: fn(u[ab[0]:ab[1]], v[ab[0]:ab[1]]), parts))
    return {k: np.concatenate([o[k] for o in outs]) for k in outs[0]}


@dataclass
class SheetData:
    which: str
    shape: tuple
    regular: np.ndarray  # bool grid
    masked: dict  # class -> count
    u: np.ndarray  # flat regular nodes
    v: np.ndarray
    closed: dict = field(default_factory=dict)  # name -> flat array
    numeric: dict = field(default_factory=dict)
    sign: Optional[np.ndarray] = None
    flips: int = 0
    patches: int = 0


def _jet_fields(prefix, j: sk.SurfaceJet):
    return {f"{prefix}{k}": getattr(j, k) for k in ("X", "X_u", "X_v", "X_uu", "X_uv", "X_vv")}


def _sheet_point_fields(spec: TubeSpec, which: str, with_fd: bool):
    surf = spec.surface(which)

    def fn(u, v):
        cf = spec.closed(which, u, v)
        out = _jet_fields("c.", cf.jet)
        f, c = cf.forms, cf.curv
        out.update({f"c.{k}": getattr(f, k) for k in ("E", "F", "G", "l", "m", "n", "N", "W2")})
        out.update({"c.K": c.K, "c.H": c.H, "c.kappa1": c.kappa1, "c.kappa2": c.kappa2})
        for k, val in cf.extra.items():
            if isinstance(val, np.ndarray) and val.shape[:1] == u.shape:
                out[f"x.{k}"] = val
        j = sk.surface_jet(surf, u, v)
        nf = sk.fundamental_forms(j, spec.tol.eps_reg, strict=False)
        nc = sk.curvatures(nf)
        out.update(_jet_fields("n.", j))
        out["n.X_vu"] = j.X_vu
        out.update({f"n.{k}": getattr(nf, k) for k in ("E", "F", "G", "l", "m", "n", "N", "W2")})
        out.update({"n.K": nc.K, "n.H": nc.H, "n.kappa1": nc.kappa1, "n.kappa2": nc.kappa2})
        if with_fd:
            fj = sk.fd_surface_jet(surf.position, u, v, spec.tol.fd_step)
            ff = sk.fundamental_forms(fj, spec.tol.eps_reg, strict=False)
            out["fd.K"] = sk.curvatures(ff).K
        return out

    return fn


def evaluate_sheet(spec: TubeSpec, which: str, grid: Grid, workers: int = 1, with_fd: bool = False) -> SheetData:
    U, V = grid.nodes()
    masks = spec.masks(which, U, V)
    bad = np.zeros(U.shape, dtype=bool)
    for m in masks.values():
        bad |= np.broadcast_to(m, U.shape)
    regular = ~bad
    data = SheetData(which, U.shape, regular, {k: int(np.sum(np.broadcast_to(m, U.shape))) for k, m in masks.items()},
                     U[regular], V[regular])
    if not np.any(regular):
        return data
    with np.errstate(all="ignore"):
        vals = _map_chunks(_sheet_point_fields(spec, which, with_fd), data.u, data.v, workers)
    data.closed = {k[2:]: v for k, v in vals.items() if k.startswith("c.") or k.startswith("x.")}
    data.numeric = {k[2:]: v for k, v in vals.items() if k.startswith("n.")}
    if "fd.K" in vals:
        data.numeric["fd.K"] = vals["fd.K"]
    _resolve_orientation(data)
    return data


def _resolve_orientation(data: SheetData):
    raw = np.sign(np.sum(data.numeric["N"] * data.closed["N"], axis=-1))
    labels, count = ndimage.label(data.regular)
    flat_labels = labels[data.regular]
    sign = np.empty_like(raw)
    flips = 0
    for lab in range(1, count + 1):
        sel = flat_labels == lab
        ref = raw[sel][0]  # first node of the patch in raster order
        sign[sel] = ref
        flips += int(np.sum(raw[sel] != ref))
    data.sign, data.flips, data.patches = sign, flips, count


# report -------------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    relation: str  # "<=" or ">"
    status: str  # "pass", "fail" or "skipped"
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "status": self.status, "value": _num(self.value),
                "relation": self.relation, "threshold": _num(self.threshold), "note": self.note}


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else repr(x)


def _check(name, value, threshold, relation="<=", note=""):
    value = float(value)
    ok = value <= threshold if relation == "<=" else value > threshold
    return Check(name, value, float(threshold), relation, "pass" if ok and np.isfinite(value) else "fail", note)


@dataclass
class TheoremReport:
    label: str
    frame_mode: str
    r: float
    checks: list = field(default_factory=list)
    masked: dict = field(default_factory=dict)
    extrema: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list:
        return [c.name for c in self.checks if c.status == "fail"]

    def check(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "frame_mode": self.frame_mode,
            "r": self.r,
            "verdict": "pass" if self.passed else "fail",
            "failed_checks": self.failures(),
            "checks": [c.to_dict() for c in self.checks],
            "masked": self.masked,
            "extrema": {k: _num(v) for k, v in self.extrema.items()},
            "tolerances": self.tolerances,
        }


def _aligned(data: SheetData, name: str):
    val = data.numeric[name]
    return data.sign * val if name in _ODD else val


def _form_checks(pre, data: SheetData, tol: Tolerances):
    out = []
    for name in FORM_NAMES:
        err = sk.scaled_error(data.closed[name], _aligned(data, name), tol.forms_rtol, tol.forms_atol)
        out.append(_check(f"{pre}.closed_vs_numeric.{name}", np.max(err), 1.0,
                          note=f"max scaled error, rtol {tol.forms_rtol:g}, atol {tol.forms_atol:g}"))
    return out


def _cross_norm(a, b):
    return np.linalg.norm(np.cross(a, b), axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _tube_checks(spec: TubeSpec, data: SheetData, focal: SheetData, report: TheoremReport):
    tol = spec.tol
    pre = "tube"
    report.checks.append(_check(f"{pre}.regular_points", data.u.size, 0, ">"))
    if data.u.size == 0:
        return
    report.checks.append(_check(f"{pre}.orientation_consistent", data.flips, 0,
                                note=f"{data.patches} regular patch(es)"))
    report.checks.extend(_form_checks(pre, data, tol))
    s = data.sign
    pair_num = (s * data.numeric["kappa1"], s * data.numeric["kappa2"])
    pair_cf = (np.full_like(data.u, 1.0 / spec.r), data.closed["kappa2"])
    split = sk.match_principal(pair_num, pair_cf, tol.principal_rtol, tol.principal_atol)
    report.checks.append(_check(f"{pre}.principal_split", np.max(split), 1.0,
                                note="{kappa1, kappa2} numeric vs {1/r, closed kappa2}"))
    X = data.numeric["X"]
    N_closed = data.closed["N"]
    rec = np.linalg.norm(X + spec.r * N_closed - data.closed["spine"], axis=-1)
    report.checks.append(_check(f"{pre}.spine_recovery", np.max(rec), tol.spine_recovery))
    k2 = data.closed["kappa2"]
    ok = np.abs(k2) > tol.eps_kappa
    if focal.u.size and np.any(ok):
        with np.errstate(all="ignore"):
            cf = spec.closed("focal", data.u[ok], data.v[ok])
            fmask = spec.masks("focal", data.u[ok], data.v[ok])
        good = ~np.logical_or.reduce([np.broadcast_to(m, k2[ok].shape) for m in fmask.values()])
        Xs = X[ok] + N_closed[ok] / k2[ok][:, None]
        dev = np.linalg.norm(Xs - cf.jet.X, axis=-1) / np.maximum(1.0, np.linalg.norm(cf.jet.X, axis=-1))
        dev = dev[good]
        if dev.size:
            report.checks.append(_check(f"{pre}.focal_offset", np.max(dev), tol.spine_recovery,
                                        note="X + N/kappa2 against the focal sheet, relative to max(1, |X*|)"))
    report.checks.append(_check(f"{pre}.mixed_symmetry", np.max(np.linalg.norm(data.numeric["X_uv"] - data.numeric["X_vu"], axis=-1)),
                                tol.flat_jet))


def _focal_checks(spec: TubeSpec, data: SheetData, report: TheoremReport):
    tol = spec.tol
    pre = "focal"
    if data.u.size == 0:
        total = int(np.prod(data.shape))
        if data.masked.get("degenerate", 0) == total:
            report.checks.append(Check(f"{pre}.all", float("nan"), 0.0, "", "skipped", "degenerate, skipped"))
        else:
            report.checks.append(_check(f"{pre}.regular_points", 0, 0, ">"))
        return
    report.checks.append(_check(f"{pre}.regular_points", data.u.size, 0, ">"))
    report.checks.append(_check(f"{pre}.orientation_consistent", data.flips, 0,
                                note=f"{data.patches} regular patch(es)"))
    num, cl = data.numeric, data.closed
    N = num["N"]
    report.checks.append(_check(f"{pre}.flat_jet", np.max(np.abs(num["K"])), tol.flat_jet, note="max |K*| numeric"))
    if "fd.K" in num:
        report.checks.append(_check(f"{pre}.flat_fd", np.max(np.abs(num["fd.K"])), tol.flat_fd,
                                    note="max |K*| finite differences"))
    report.checks.extend(_form_checks(pre, data, tol))
    m_num = np.abs(_dot(num["X_uv"], N))
    n_num = np.abs(_dot(num["X_vv"], N))
    report.checks.append(_check(f"{pre}.m_star_zero", np.max(m_num), tol.asymptotic))
    report.checks.append(_check(f"{pre}.v_asymptotic", np.max(n_num), tol.asymptotic, note="max |<X*_vv, N*>|"))
    H = np.abs(cl["H"])
    report.extrema["focal.min_abs_H"] = float(np.min(H))
    report.extrema["focal.max_abs_H"] = float(np.max(H))
    report.checks.append(_check(f"{pre}.non_minimal", np.min(H), 0.0, ">", note="min |H*| over regular nodes"))
    report.checks.append(_check(f"{pre}.l_star_nonzero", np.min(np.abs(cl["l"])), 1e-10, ">"))
    l_num = np.abs(_dot(num["X_uu"], N))
    report.extrema["focal.min_u_normal_component"] = float(np.min(l_num))
    report.checks.append(_check(f"{pre}.u_not_asymptotic", np.min(l_num), 1e-10, ">", note="min |<X*_uu, N*>|"))
    ug = _cross_norm(num["X_uu"], N)
    ug_cf = _cross_norm(cl["X_uu"], cl["N"])
    report.extrema["focal.u_geodesic_residual_min"] = float(np.min(ug))
    report.extrema["focal.u_geodesic_residual_max"] = float(np.max(ug))
    report.checks.append(_check(f"{pre}.u_geodesic_residual", np.max(sk.scaled_error(ug, ug_cf, tol.forms_rtol, tol.forms_atol)),
                                1.0, note="numeric |X*_uu x N*| vs closed form"))
    vg = _cross_norm(num["X_vv"], N)
    report.extrema["focal.v_geodesic_residual_min"] = float(np.min(vg))
    report.extrema["focal.v_geodesic_residual_max"] = float(np.max(vg))
    if spec.frame_mode == "frenet":
        kap = cl["kappa"]
        c, s = np.cos(data.v), np.sin(data.v)
        pred = 2 * np.abs(s) / (np.abs(kap) * np.abs(c) ** 3)
        report.checks.append(_check(f"{pre}.v_geodesic_iff_sin_v_zero", np.max(sk.scaled_error(vg, pred, tol.forms_rtol, tol.forms_atol)),
                                    1.0, note="|X*_vv x N*| = 2|sin v|/(kappa |cos v|^3)"))
        cond = cl["u_geodesic_condition"]
        report.extrema["focal.u_geodesic_condition_max"] = float(np.max(np.abs(cond)))
    else:
        report.checks.append(_check(f"{pre}.v_never_geodesic", np.min(vg), 1e-10, ">", note="min |X*_vv x N*|"))
        for k in ("u_geodesic_condition", "u_geodesic_system_1", "u_geodesic_system_2"):
            report.extrema[f"focal.{k}_max"] = float(np.max(np.abs(cl[k])))


def verify_theorems(spec: TubeSpec, grid: Grid, focal_grid: Optional[Grid] = None, workers: int = 1,
                    with_fd: bool = True) -> TheoremReport:
    """Run every grid check for the tube (on ``grid``) and the focal sheet (on ``focal_grid``)."""
    report = TheoremReport(spec.label, spec.frame_mode, spec.r, tolerances=dict(vars(spec.tol)))
    tube = evaluate_sheet(spec, "tube", grid, workers)
    focal = evaluate_sheet(spec, "focal", focal_grid or grid, workers, with_fd=with_fd)
    report.masked = {"tube": tube.masked, "focal": focal.masked}
    _tube_checks(spec, tube, focal, report)
    _focal_checks(spec, focal, report)
    return report


# anchors and pointwise classification --------------------------------------------------


QUANTITIES = FORM_NAMES + ("kappa1", "kappa2")


def anchor_value(spec: TubeSpec, which: str, quantity: str, u: float, v: float):
    """(closed form, numeric with the normal aligned to the closed-form one) at one point."""
    if quantity not in QUANTITIES:
        raise KeyError(f"unknown quantity {quantity!r}; expected one of {', '.join(QUANTITIES)}")
    tb._raise_masks(spec.masks(which, u, v))
    cf = spec.closed(which, u, v)
    j = sk.surface_jet(spec.surface(which), u, v)
    nf = sk.fundamental_forms(j, spec.tol.eps_reg)
    sign = float(sk.orientation_sign(nf.N, cf.forms.N))
    nc = sk.curvatures(nf.flipped(sign))
    source_cf = cf.curv if quantity in ("K", "H", "kappa1", "kappa2") else cf.forms
    if quantity in ("kappa1", "kappa2"):
        closed = float(getattr(source_cf, quantity))
        pair = (float(nc.kappa1), float(nc.kappa2))
        numeric = min(pair, key=lambda x: abs(x - closed))
        return closed, numeric
    numeric_src = nc if quantity in ("K", "H") else nf.flipped(sign)
    return float(getattr(source_cf, quantity)), float(getattr(numeric_src, quantity))


@dataclass(frozen=True)
class ClassificationReport:
    u_asymptotic: float
    v_asymptotic: float
    u_geodesic: float
    v_geodesic: float
    u_geodesic_condition: float
    v_geodesic_condition: object  # sin v (Frenet) or "never" (Darboux)
    u_geodesic_system: Optional[tuple] = None  # Darboux only: the two component conditions


def classify_focal_curves(mode: str, spine, u: float, v: float, tol: Tolerances = DEFAULT_TOL) -> ClassificationReport:
    """Asymptotic and geodesic residuals of the focal parameter curves at one point."""
    spec = TubeSpec(mode, spine, 1.0, tol)
    tb._raise_masks(spec.masks("focal", u, v))
    j = sk.surface_jet(spec.surface("focal"), u, v)
    f = sk.fundamental_forms(j, tol.eps_reg)
    ua, ug = sk.classify_point(j, f, "u")
    va, vg = sk.classify_point(j, f, "v")
    cf = spec.closed("focal", u, v)
    if mode == "frenet":
        return ClassificationReport(float(abs(ua)), float(abs(va)), float(ug), float(vg),
                                    float(cf.extra["u_geodesic_condition"]), float(np.sin(v)))
    ex = cf.extra
    return ClassificationReport(float(abs(ua)), float(abs(va)), float(ug), float(vg),
                                float(ex["u_geodesic_condition"]), "never",
                                (float(ex["u_geodesic_system_1"]), float(ex["u_geodesic_system_2"])))
