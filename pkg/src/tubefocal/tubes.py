"""Tubular surfaces under Frenet and Darboux frames, and their focal sheets.

Two independent routes are provided for every surface:

* closed forms, which assemble positions, partials, fundamental forms and
  curvatures directly from the frame apparatus (curvature, its derivatives,
  frame vectors), and
* a numeric path, a surface evaluator for :mod:`tubefocal.surfkit` built only
  from the defining position map, differentiated by jets.

Normals in the closed forms follow the frame-expressed convention: tube
normal ``-cos v N1 - sin v N2`` (resp. ``-cos v Y - sin v U``), focal normal
``-T`` for the Frenet sheet and ``+T`` for the Darboux sheet.

Everything broadcasts over arrays of ``(u, v)``.  Pointwise wrappers raise on
singular points; grid code asks :func:`singularity_masks` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import framekit as fk
from . import surfkit as sk
from .exprcurve import jet as J
from .exprcurve.jet import Jet


class NotPlanar(ValueError):
    pass


class FocalPoleV(sk.SingularPoint):
    pass


class FocalPoleB(sk.SingularPoint):
    pass


class FocalDegenerate(sk.SingularPoint):
    pass


@dataclass(frozen=True)
class Tolerances:
    eps_kappa: float = 1e-8
    eps_b: float = 1e-8
    eps_v: float = 1e-8
    eps_reg: float = 1e-10
    eps_deg: float = 1e-10
    unit_speed: float = 1e-6
    frame: float = 1e-8
    planarity: float = 1e-9
    forms_rtol: float = 1e-6
    forms_atol: float = 1e-8
    flat_jet: float = 1e-8
    flat_fd: float = 1e-4
    asymptotic: float = 1e-8
    principal_rtol: float = 1e-8
    principal_atol: float = 1e-12
    spine_recovery: float = 1e-9
    fd_step: float = 1e-3
    anchor: float = 1e-6

    def override(self, **kw) -> "Tolerances":
        unknown = set(kw) - set(self.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: float(v) for k, v in kw.items()})


DEFAULT_TOL = Tolerances()


# spines -------------------------------------------------------------------------


class FrenetSpine:
    """Planar unit-speed spine with its Frenet apparatus."""

    def __init__(self, curve, tol: Tolerances = DEFAULT_TOL, span=None, nsamples: int = 200,
                 require_planar: bool = True):
        self.curve = curve
        self.tol = tol
        self.domain = span if span is not None else curve.domain
        if require_planar:
            self.check_planar(nsamples)

    def check_planar(self, nsamples: int = 200):
        lo, hi = self.domain
        if not (np.isfinite(lo) and np.isfinite(hi)):
            return
        u = np.linspace(lo, hi, nsamples)
        g = self.curve.jet(u, 3)
        z = float(np.max(np.abs(g.value[..., 2])))
        d1, d2, d3 = g.d(), g.d().d(), g.d().d().d()
        cr = np.cross(d1.value, d2.value)
        k2 = np.sum(d2.value**2, axis=-1)
        ok = k2 > self.tol.eps_kappa**2
        tau = np.abs(np.sum(cr * d3.value, axis=-1)[ok] / k2[ok]) if np.any(ok) else np.zeros(1)
        worst = max(z, float(np.max(tau)))
        if worst > self.tol.planarity:
            raise NotPlanar(f"spine leaves the plane z = 0 (max |z| or |tau| = {worst:.3e})")

    def frame(self, u, order: int = 3) -> fk.FrenetJets:
        return fk.frenet_jets(self.curve, u, order, self.tol.unit_speed, self.tol.eps_kappa)


def _vjet(v, dv, order):
    return Jet.variable(v, order, dv)


def _rescaled(jets, du):
    return type(jets)(*(j.rescale(du) for j in jets))


def _bcast(u, v):
    return np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))


# closed-form containers ---------------------------------------------------------


@dataclass(frozen=True)
class ClosedForms:
    jet: sk.SurfaceJet
    forms: sk.FundamentalForms
    curv: sk.CurvatureSummary
    W: np.ndarray
    extra: dict = field(default_factory=dict)


def _summary(forms: sk.FundamentalForms, K, H, k1, k2) -> sk.CurvatureSummary:
    shape = sk.curvatures(forms).shape
    return sk.CurvatureSummary(np.asarray(K), np.asarray(H), np.asarray(k1), np.asarray(k2), shape)


def _sv(s, v):
    return np.asarray(s)[..., None] * v


# Frenet tube --------------------------------------------------------------------


def _frenet_vals(spine: FrenetSpine, u, order):
    fj = spine.frame(u, order)
    k = fj.kappa.derivatives()
    return fj, k


def tube_frenet(spine: FrenetSpine, r: float, u, v) -> ClosedForms:
    """Closed-form tube around a planar spine: jet, forms and curvatures."""
    u, v = _bcast(u, v)
    fj, k = _frenet_vals(spine, u, 1)
    kap, dkap = k[0], k[1]
    g, T, N1, N2 = fj.gamma.value, fj.T.value, fj.N1.value, fj.N2.value
    c, s = np.cos(v), np.sin(v)
    a = 1.0 - kap * r * c
    jet = sk.SurfaceJet(
        X=g + r * (_sv(c, N1) + _sv(s, N2)),
        X_u=_sv(a, T),
        X_v=_sv(-r * s, N1) + _sv(r * c, N2),
        X_uu=_sv(-dkap * r * c, T) + _sv(kap * a, N1),
        X_uv=_sv(kap * r * s, T),
        X_vv=_sv(-r * c, N1) + _sv(-r * s, N2),
    )
    E, F, G = a * a, np.zeros_like(a), np.full_like(a, r * r)
    W2 = a * a * r * r
    N = -(_sv(c, N1) + _sv(s, N2))
    forms = sk.FundamentalForms(E, F, G, W2, -kap * a * c, np.zeros_like(a), np.full_like(a, r), N)
    K = -kap * c / (r * a)
    H = (1 - 2 * kap * r * c) / (2 * r * a)
    k2 = -kap * c / a
    curv = sk.CurvatureSummary(K, H, np.full_like(a, 1.0 / r), k2,
                               np.stack([np.stack([k2, 0 * a], -1), np.stack([0 * a, 0 * a + 1.0 / r], -1)], -2))
    return ClosedForms(jet, forms, curv, np.abs(a) * r, {"spine": g})


def focal_frenet(spine: FrenetSpine, u, v) -> ClosedForms:
    """Closed-form focal sheet of the Frenet tube (the sheet for kappa_2)."""
    u, v = _bcast(u, v)
    fj, k = _frenet_vals(spine, u, 2)
    kap, dk, ddk = k[0], k[1], k[2]
    g, T, N1, N2 = fj.gamma.value, fj.T.value, fj.N1.value, fj.N2.value
    c, s = np.cos(v), np.sin(v)
    tn = s / c
    dirn = N1 + _sv(tn, N2)
    geo = (-ddk * kap + 2 * dk * dk) / kap**3
    jet = sk.SurfaceJet(
        X=g + _sv(1 / kap, N1) + _sv(tn / kap, N2),
        X_u=_sv(-dk / kap**2, dirn),
        X_v=_sv(1 / (kap * c * c), N2),
        X_uu=_sv(dk / kap, T) + _sv(geo, dirn),
        X_uv=_sv(-dk / kap**2 * (1 + tn * tn), N2),
        X_vv=_sv(2 * s / (kap * c**3), N2),
    )
    E = dk * dk / (kap**4 * c * c)
    F = -dk * s / (kap**3 * c**3)
    G = 1 / (kap * kap * c**4)
    W2 = dk * dk / (kap**6 * c**4)
    zero = np.zeros_like(E)
    forms = sk.FundamentalForms(E, F, G, W2, -dk / kap, zero, zero, -T + 0 * jet.X)
    H = -kap**3 / (2 * dk)
    curv = _summary(forms, zero, H, 2 * H, zero)
    extra = {"u_geodesic_condition": -ddk * kap + 2 * dk * dk, "v_geodesic_condition": s,
             "regularity": dk, "pole": c, "kappa": kap, "dkappa": dk}
    return ClosedForms(jet, forms, curv, np.sqrt(W2), extra)


# Darboux tube -------------------------------------------------------------------


@dataclass(frozen=True)
class BScalar:
    b: np.ndarray
    b_u: np.ndarray
    b_v: np.ndarray
    b_uu: np.ndarray
    b_uv: np.ndarray
    b_vv: np.ndarray


def b_scalar(dj: fk.DarbouxJets, v) -> BScalar:
    kg, kn = dj.kg.derivatives(), dj.kn.derivatives()
    c, s = np.cos(v), np.sin(v)
    b = kg[0] * c + kn[0] * s
    return BScalar(
        b=b,
        b_u=kg[1] * c + kn[1] * s,
        b_v=-kg[0] * s + kn[0] * c,
        b_uu=kg[2] * c + kn[2] * s,
        b_uv=-kg[1] * s + kn[1] * c,
        b_vv=-b,
    )


def tube_darboux(source, r: float, u, v) -> ClosedForms:
    u, v = _bcast(u, v)
    dj = source.frame(u, 2)
    B = b_scalar(dj, v)
    tg = dj.taug.derivatives()
    tau, dtau = tg[0], tg[1]
    kg, kn = dj.kg.value, dj.kn.value
    g, T, Y, U = dj.gamma.value, dj.T.value, dj.Y.value, dj.U.value
    c, s = np.cos(v), np.sin(v)
    b = B.b
    a = 1 - b * r
    jet = sk.SurfaceJet(
        X=g + r * (_sv(c, Y) + _sv(s, U)),
        X_u=_sv(a, T) + _sv(-r * tau * s, Y) + _sv(r * tau * c, U),
        X_v=_sv(-r * s, Y) + _sv(r * c, U),
        X_uu=_sv(-B.b_u * r - r * tau * B.b_v, T)
        + _sv(kg * a - r * dtau * s - r * tau**2 * c, Y)
        + _sv(kn * a + r * dtau * c - r * tau**2 * s, U),
        X_uv=_sv(-B.b_v * r, T) + _sv(-r * tau * c, Y) + _sv(-r * tau * s, U),
        X_vv=_sv(-r * c, Y) + _sv(-r * s, U),
    )
    E = a * a + r * r * tau * tau
    F = r * r * tau
    G = np.full_like(E, r * r)
    W2 = a * a * r * r
    N = -(_sv(c, Y) + _sv(s, U))
    forms = sk.FundamentalForms(E, F, G, W2, -a * b + r * tau * tau, r * tau, np.full_like(E, r), N)
    K = b / (r * (b * r - 1))
    H = (1 - 2 * b * r) / (2 * a * r)
    curv = _summary(forms, K, H, np.full_like(E, 1 / r), b / (b * r - 1))
    return ClosedForms(jet, forms, curv, np.abs(a) * r, {"spine": g, "b": B})


def focal_darboux(source, u, v) -> ClosedForms:
    u, v = _bcast(u, v)
    dj = source.frame(u, 3)
    B = b_scalar(dj, v)
    tg = dj.taug.derivatives()
    tau, dtau, ddtau = tg[0], tg[1], tg[2]
    g, T, Y, U = dj.gamma.value, dj.T.value, dj.Y.value, dj.U.value
    c, s = np.cos(v), np.sin(v)
    b, bu, bv, buu, buv, bvv = B.b, B.b_u, B.b_v, B.b_uu, B.b_uv, B.b_vv
    b2, b3, b4 = b * b, b**3, b**4
    q = bu - bv * tau
    jet = sk.SurfaceJet(
        X=g + _sv(1 / b, _sv(c, Y) + _sv(s, U)),
        X_u=_sv(-bu / b2 * c - tau * s / b, Y) + _sv(-bu / b2 * s + tau * c / b, U),
        X_v=_sv(-bv / b2 * c - s / b, Y) + _sv(-bv / b2 * s + c / b, U),
        X_uu=_sv(q / b, T)
        + _sv((-buu * b2 * c + 2 * b * bu**2 * c + 2 * bu * b2 * tau * s - b3 * tau**2 * c - b3 * dtau * s) / b4, Y)
        + _sv((-buu * b2 * s + 2 * b * bu**2 * s - 2 * bu * b2 * tau * c - b3 * tau**2 * s + b3 * dtau * c) / b4, U),
        X_uv=_sv((-buv * b2 * c + 2 * b * bu * bv * c + bu * b2 * s + bv * b2 * tau * s - b3 * tau * c) / b4, Y)
        + _sv((-buv * b2 * s + 2 * b * bu * bv * s - bu * b2 * c - bv * b2 * tau * c - b3 * tau * s) / b4, U),
        X_vv=_sv((-bvv * b2 * c + 2 * b * bv**2 * c + 2 * bv * b2 * s - b3 * c) / b4, Y)
        + _sv((-bvv * b2 * s + 2 * b * bv**2 * s - 2 * bv * b2 * c - b3 * s) / b4, U),
    )
    E = (bu**2 + b2 * tau**2) / b4
    F = (bu * bv + b2 * tau) / b4
    G = (bv**2 + b2) / b4
    W2 = q * q / b**6
    zero = np.zeros_like(E)
    forms = sk.FundamentalForms(E, F, G, W2, q / b, zero, zero, T + 0 * jet.X)
    H = (bv**2 + b2) * b / (2 * q)
    curv = _summary(forms, zero, H, 2 * H, zero)
    extra = {
        "b": B,
        "regularity": q,
        "pole": b,
        "u_geodesic_condition": -2 * tau * (bu * dtau + b * ddtau) + 4 * b * dtau**2 - 4 * b * tau**4,
        "u_geodesic_system_1": b * (-buu * b + 2 * bu**2 - b2 * tau**2),
        "u_geodesic_system_2": b2 * (2 * bu * tau - b * dtau),
        "v_geodesic_system_1": b * (bvv * b - 2 * bv**2 + b2),
        "v_geodesic_system_2": bv,
    }
    return ClosedForms(jet, forms, curv, np.sqrt(W2), extra)


# numeric-path evaluators ---------------------------------------------------------


class _Evaluator:
    """Surface evaluator (see :mod:`tubefocal.surfkit`) plus a float position map."""

    def __call__(self, u, v, du, dv, order):
        raise NotImplementedError

    def position(self, u, v):
        u, v = _bcast(u, v)
        return self(u, v, 1.0, 0.0, 0).value


class FrenetTubeSurface(_Evaluator):
    def __init__(self, spine: FrenetSpine, r: float):
        self.spine, self.r = spine, r

    def __call__(self, u, v, du, dv, order):
        fj = _rescaled(self.spine.frame(u, order), du)
        vj = _vjet(v, dv, order)
        ring = J.smul(J.cos(vj), fj.N1) + J.smul(J.sin(vj), fj.N2)
        return fj.gamma + ring * self.r


class FrenetFocalSurface(_Evaluator):
    def __init__(self, spine: FrenetSpine):
        self.spine = spine

    def __call__(self, u, v, du, dv, order):
        fj = _rescaled(self.spine.frame(u, order), du)
        vj = _vjet(v, dv, order)
        inv = J.reciprocal(fj.kappa * J.cos(vj))
        ring = J.smul(J.cos(vj), fj.N1) + J.smul(J.sin(vj), fj.N2)
        return fj.gamma + J.smul(inv, ring)


class DarbouxTubeSurface(_Evaluator):
    def __init__(self, source, r: float):
        self.source, self.r = source, r

    def __call__(self, u, v, du, dv, order):
        dj = _rescaled(self.source.frame(u, order), du)
        vj = _vjet(v, dv, order)
        ring = J.smul(J.cos(vj), dj.Y) + J.smul(J.sin(vj), dj.U)
        return dj.gamma + ring * self.r


class DarbouxFocalSurface(_Evaluator):
    def __init__(self, source):
        self.source = source

    def __call__(self, u, v, du, dv, order):
        dj = _rescaled(self.source.frame(u, order), du)
        vj = _vjet(v, dv, order)
        cv, sv = J.cos(vj), J.sin(vj)
        b = dj.kg * cv + dj.kn * sv
        ring = J.smul(cv, dj.Y) + J.smul(sv, dj.U)
        return dj.gamma + J.smul(J.reciprocal(b), ring)


# singularity classes ------------------------------------------------------------


def singularity_masks(mode: str, which: str, spine, r: Optional[float], u, v, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Boolean masks (True = masked) per singularity class at grid nodes.

    Tube sheets: ``singular`` where |W| <= eps_reg.  Frenet focal sheet:
    ``pole_v`` where |cos v| <= eps_v, ``degenerate`` where |kappa'| <= eps_deg.
    Darboux focal sheet: ``pole_b`` where |b| <= eps_b, ``degenerate`` where
    |b_u - b_v tau_g| <= eps_deg.
    """
    u, v = _bcast(u, v)
    if mode == "frenet":
        fj = spine.frame(u, 1)
        kap = fj.kappa.value
        dk = fj.kappa.deriv(1)
        if which == "tube":
            return {"singular": np.abs(1 - kap * r * np.cos(v)) * r <= tol.eps_reg}
        return {"pole_v": np.abs(np.cos(v)) <= tol.eps_v,
                "degenerate": np.abs(dk) <= tol.eps_deg}
    dj = spine.frame(u, 1)
    kg, kn = dj.kg.derivatives(), dj.kn.derivatives()
    c, s = np.cos(v), np.sin(v)
    b = kg[0] * c + kn[0] * s
    if which == "tube":
        return {"singular": np.abs(1 - b * r) * r <= tol.eps_reg}
    bu = kg[1] * c + kn[1] * s
    bv = -kg[0] * s + kn[0] * c
    q = bu - bv * dj.taug.value
    return {"pole_b": np.abs(b) <= tol.eps_b, "degenerate": np.abs(q) <= tol.eps_deg}


def _raise_masks(masks):
    errors = {"singular": sk.SingularPoint, "pole_v": FocalPoleV, "pole_b": FocalPoleB,
              "degenerate": FocalDegenerate}
    for name, m in masks.items():
        if np.any(m):
            raise errors[name](f"point is {name.replace('_', ' ')}")


# pointwise API -------------------------------------------------------------------


def tube_point_frenet(spine: FrenetSpine, r: float, u: float, v: float) -> sk.SurfaceJet:
    return tube_frenet(spine, r, u, v).jet


def tube_forms_frenet(spine: FrenetSpine, r: float, u: float, v: float) -> ClosedForms:
    _raise_masks(singularity_masks("frenet", "tube", spine, r, u, v, spine.tol))
    return tube_frenet(spine, r, u, v)


def focal_point_frenet(spine: FrenetSpine, u: float, v: float) -> sk.SurfaceJet:
    _raise_masks(singularity_masks("frenet", "focal", spine, None, u, v, spine.tol))
    return focal_frenet(spine, u, v).jet


def focal_forms_frenet(spine: FrenetSpine, u: float, v: float) -> ClosedForms:
    _raise_masks(singularity_masks("frenet", "focal", spine, None, u, v, spine.tol))
    return focal_frenet(spine, u, v)


def tube_point_darboux(source, r: float, u: float, v: float) -> sk.SurfaceJet:
    return tube_darboux(source, r, u, v).jet


def tube_forms_darboux(source, r: float, u: float, v: float, tol: Tolerances = DEFAULT_TOL) -> ClosedForms:
    _raise_masks(singularity_masks("darboux", "tube", source, r, u, v, tol))
    return tube_darboux(source, r, u, v)


def focal_point_darboux(source, u: float, v: float, tol: Tolerances = DEFAULT_TOL) -> sk.SurfaceJet:
    _raise_masks(singularity_masks("darboux", "focal", source, None, u, v, tol))
    return focal_darboux(source, u, v).jet


def focal_forms_darboux(source, u: float, v: float, tol: Tolerances = DEFAULT_TOL) -> ClosedForms:
    _raise_masks(singularity_masks("darboux", "focal", source, None, u, v, tol))
    return focal_darboux(source, u, v)
