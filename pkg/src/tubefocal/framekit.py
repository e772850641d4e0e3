"""Frenet and Darboux moving frames along unit-speed curves.

Frame fields are produced as jets in the curve parameter, so every frame
vector and curvature comes with exact derivatives.  Three Darboux sources are
supported: analytic frame fields (validated against the Darboux equations), a
host surface with a curve in its parameter domain, and a Frenet spine rotated
by an angle function.

Orientation: every Darboux frame here is right-handed, ``Y = U x T``.  With
that convention the rotation from a Frenet frame that reproduces
``k_g = kappa cos(theta)``, ``k_n = kappa sin(theta)`` and
``tau_g = tau - theta'`` is ``Y = cos(theta) N1 - sin(theta) N2``,
``U = sin(theta) N1 + cos(theta) N2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exprcurve import jet as J
from .exprcurve.curve import CurveDef
from .exprcurve.expr import Node, diff, eval_jet, evaluate
from .exprcurve.fd import richardson_derivatives
from .exprcurve.jet import Jet

EPS_KAPPA = 1e-8
UNIT_SPEED_TOL = 1e-6
FRAME_TOL = 1e-8
DARBOUX_CONVENTION = "U = (X_s x X_t)/|X_s x X_t| for host surfaces; Y = U x T; (T, Y, U) right-handed"


class FrameError(ValueError):
    pass


class NotUnitSpeed(FrameError):
    pass


class VanishingCurvature(FrameError):
    pass


class DegenerateHost(FrameError):
    pass


class FrameInconsistent(FrameError):
    def __init__(self, row: str, residual: float, tol: float):
        self.row = row
        self.residual = residual
        super().__init__(f"Darboux equation row {row} violated: residual {residual:.3e} > {tol:.1e}")


# apparatus snapshots -----------------------------------------------------------


@dataclass(frozen=True)
class FrenetApparatus:
    T: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    kappa: float
    tau: float
    kappa_jet: Jet


@dataclass(frozen=True)
class DarbouxApparatus:
    T: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    kg: float
    kn: float
    taug: float
    kg_jet: Optional[Jet] = None
    kn_jet: Optional[Jet] = None
    taug_jet: Optional[Jet] = None
    residuals: Optional[tuple] = None
    convention: str = DARBOUX_CONVENTION


class FrenetJets(NamedTuple):
    gamma: Jet
    T: Jet
    N1: Jet
    N2: Jet
    kappa: Jet
    tau: Jet


class DarbouxJets(NamedTuple):
    gamma: Jet
    T: Jet
    Y: Jet
    U: Jet
    kg: Jet
    kn: Jet
    taug: Jet


@dataclass(frozen=True)
class UnitSpeedReport:
    max_dev: float
    ok: bool


# Frenet --------------------------------------------------------------------------


def _speed_check(dgamma: Jet, tol: float):
    dev = np.abs(np.sqrt(np.sum(dgamma.value**2, axis=-1)) - 1.0)
    if np.any(dev > tol):
        raise NotUnitSpeed(f"|gamma'| deviates from 1 by {np.max(dev):.3e} (tolerance {tol:.1e})")


def frenet_jets(curve, u, order: int = 3, unit_tol: float = UNIT_SPEED_TOL,
                eps_kappa: float = EPS_KAPPA) -> FrenetJets:
    """Frenet frame and curvatures as jets of ``order`` at ``u`` (scalar or array)."""
    g = curve.jet(u, order + 3)
    d1 = g.d()
    _speed_check(d1, unit_tol)
    d2 = d1.d()
    d3 = d2.d()
    if np.any(np.sqrt(np.sum(d2.value**2, axis=-1)) <= eps_kappa):
        raise VanishingCurvature(f"curvature below {eps_kappa:g}; principal normal undefined")
    kappa = J.norm(d2)
    N1 = J.smul(J.reciprocal(kappa), d2)
    T = d1
    N2 = J.cross(T, N1)
    tau = J.dot(J.cross(d1, d2), d3) / (kappa * kappa)
    k = order
    return FrenetJets(g.truncate(k), T.truncate(k), N1.truncate(k), N2.truncate(k), kappa.truncate(k), tau.truncate(k))


def frenet_at(curve, u: float, unit_tol: float = UNIT_SPEED_TOL, eps_kappa: float = EPS_KAPPA) -> FrenetApparatus:
    """Frenet apparatus of a unit-speed curve at ``u``."""
    fj = frenet_jets(curve, float(u), 3, unit_tol, eps_kappa)
    return FrenetApparatus(
        T=fj.T.value.copy(),
        N1=fj.N1.value.copy(),
        N2=fj.N2.value.copy(),
        kappa=float(fj.kappa.value),
        tau=float(fj.tau.value),
        kappa_jet=fj.kappa,
    )


def check_unit_speed(curve, nsamples: int = 200, tol: float = UNIT_SPEED_TOL, span=None) -> UnitSpeedReport:
    if nsamples < 2:
        raise ValueError("nsamples must be at least 2")
    lo, hi = span if span is not None else curve.domain
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("finite span required for sampling")
    u = np.linspace(lo, hi, nsamples)
    d1 = curve.jet(u, 1).d()
    dev = float(np.max(np.abs(np.sqrt(np.sum(d1.value**2, axis=-1)) - 1.0)))
    return UnitSpeedReport(dev, dev <= tol)


def frenet_residuals(fj: FrenetJets):
    """Norms of T' - kN1, N1' + kT - tN2, N2' + tN1 (needs order >= 1 jets)."""
    k, t = fj.kappa.value[..., None], fj.tau.value[..., None]
    T, N1, N2 = fj.T.value, fj.N1.value, fj.N2.value
    r1 = fj.T.d().value - k * N1
    r2 = fj.N1.d().value + k * T - t * N2
    r3 = fj.N2.d().value + t * N1
    return tuple(np.linalg.norm(r, axis=-1) for r in (r1, r2, r3))


# Darboux ------------------------------------------------------------------------


def darboux_residuals(T, Y, U, kg, kn, taug, dT, dY, dU):
    """Row residual norms of the Darboux equations from values and derivatives."""
    kg, kn, taug = (np.asarray(x)[..., None] for x in (kg, kn, taug))
    r1 = dT - kg * Y - kn * U
    r2 = dY + kg * T - taug * U
    r3 = dU + kn * T + taug * Y
    return tuple(np.linalg.norm(r, axis=-1) for r in (r1, r2, r3))


def orthonormality_error(a, b, c) -> np.ndarray:
    m = np.stack([a, b, c], axis=-2)
    gram = m @ np.swapaxes(m, -1, -2)
    err = np.max(np.abs(gram - np.eye(3)), axis=(-1, -2))
    det = np.linalg.det(m)
    return np.maximum(err, np.abs(det - 1.0))


def _raise_on_rows(res, tol):
    for name, r in zip(("T'", "Y'", "U'"), res):
        worst = float(np.max(r))
        if worst > tol:
            raise FrameInconsistent(name, worst, tol)


def _vector_jet(defn: CurveDef, u, order):
    return defn.jet(u, order)


def _scalar_jet(tree: Node, u, order, var="u"):
    return eval_jet(tree, u, order, var)


def darboux_direct(Tdef: CurveDef, Ydef: CurveDef, Udef: CurveDef, kg: Node, kn: Node, taug: Node,
                   u: float, tol: float = FRAME_TOL) -> DarbouxApparatus:
    """Package an analytic Darboux frame, rejecting it if it violates the frame equations."""
    Tj, Yj, Uj = (_vector_jet(d, u, 4) for d in (Tdef, Ydef, Udef))
    kgj, knj, tgj = (_scalar_jet(e, u, 3) for e in (kg, kn, taug))
    ortho = float(orthonormality_error(Tj.value, Yj.value, Uj.value))
    if ortho > tol:
        raise FrameInconsistent("orthonormality", ortho, tol)
    res = darboux_residuals(Tj.value, Yj.value, Uj.value, kgj.value, knj.value, tgj.value,
                            Tj.d().value, Yj.d().value, Uj.d().value)
    _raise_on_rows(res, tol)
    return DarbouxApparatus(
        T=Tj.value.copy(), Y=Yj.value.copy(), U=Uj.value.copy(),
        kg=float(kgj.value), kn=float(knj.value), taug=float(tgj.value),
        kg_jet=kgj, kn_jet=knj, taug_jet=tgj,
        residuals=tuple(float(r) for r in res),
    )


def frenet_to_darboux(f: FrenetApparatus, theta: float, theta_prime: float) -> DarbouxApparatus:
    c, s = np.cos(theta), np.sin(theta)
    Y = c * f.N1 - s * f.N2
    U = s * f.N1 + c * f.N2
    return DarbouxApparatus(T=f.T, Y=Y, U=U, kg=f.kappa * c, kn=f.kappa * s, taug=f.tau - theta_prime)


@dataclass(frozen=True)
class HostSurfaceDef:
    """Host surface X_S(s, t) with a curve (s(u), t(u)) in its parameter domain."""

    components: tuple  # three trees in (s, t)
    s_of_u: Node
    t_of_u: Node
    domain: tuple = (-np.inf, np.inf)
    label: str = ""

    def _st(self, u, order):
        s = eval_jet(self.s_of_u, u, order)
        t = eval_jet(self.t_of_u, u, order)
        return s, t

    def _eval(self, trees, s, t):
        vals = []
        for tree in trees:
            val = evaluate(tree, {"s": s, "t": t})
            vals.append(val if isinstance(val, Jet) else Jet.constant(np.broadcast_to(val, s.shape), s.order))
        return J.stack(vals)

    def jet(self, u, order: int = 3) -> Jet:
        """gamma(u) = X_S(s(u), t(u)) as a vector jet."""
        s, t = self._st(u, order)
        return self._eval(self.components, s, t)

    def normal_jet(self, u, order: int) -> Jet:
        s, t = self._st(u, order)
        xs = self._eval(tuple(diff(c, "s") for c in self.components), s, t)
        xt = self._eval(tuple(diff(c, "t") for c in self.components), s, t)
        n = J.cross(xs, xt)
        if np.any(np.sqrt(np.sum(n.value**2, axis=-1)) <= 1e-12):
            raise DegenerateHost("host patch is singular along the curve")
        return J.normalize(n)


# Darboux sources ----------------------------------------------------------------


class DirectDarboux:
    """Spine curve plus analytic Darboux frame fields and curvatures."""

    def __init__(self, curve: CurveDef, Tdef: CurveDef, Ydef: CurveDef, Udef: CurveDef,
                 kg: Node, kn: Node, taug: Node):
        self.curve = curve
        self.Tdef, self.Ydef, self.Udef = Tdef, Ydef, Udef
        self.kg, self.kn, self.taug = kg, kn, taug
        self.domain = curve.domain

    def frame(self, u, order: int = 3, unit_tol: float = UNIT_SPEED_TOL) -> DarbouxJets:
        g = self.curve.jet(u, order + 1)
        _speed_check(g.d(), unit_tol)
        return DarbouxJets(
            g.truncate(order),
            self.Tdef.jet(u, order), self.Ydef.jet(u, order), self.Udef.jet(u, order),
            eval_jet(self.kg, u, order), eval_jet(self.kn, u, order), eval_jet(self.taug, u, order),
        )

    def validate(self, u, tol: float = FRAME_TOL) -> dict:
        """Check orthonormality, T = gamma' and the Darboux equations at samples ``u``."""
        dj = self.frame(u, 1)
        ortho = float(np.max(orthonormality_error(dj.T.value, dj.Y.value, dj.U.value)))
        if ortho > tol:
            raise FrameInconsistent("orthonormality", ortho, tol)
        tangent = float(np.max(np.linalg.norm(dj.T.value - dj.gamma.d().value, axis=-1)))
        if tangent > tol:
            raise FrameInconsistent("T = gamma'", tangent, tol)
        res = darboux_residuals(dj.T.value, dj.Y.value, dj.U.value, dj.kg.value, dj.kn.value, dj.taug.value,
                                dj.T.d().value, dj.Y.d().value, dj.U.d().value)
        _raise_on_rows(res, tol)
        return {"orthonormality": ortho, "tangent": tangent, "rows": [float(np.max(r)) for r in res]}


class HostDarboux:
    """Darboux frame induced by a host surface."""

    def __init__(self, host: HostSurfaceDef):
        self.host = host
        self.curve = host
        self.domain = host.domain

    def frame(self, u, order: int = 3, unit_tol: float = UNIT_SPEED_TOL) -> DarbouxJets:
        g = self.host.jet(u, order + 2)
        T = g.d()
        _speed_check(T, unit_tol)
        U = self.host.normal_jet(u, order + 1)
        Y = J.cross(U, T)
        dT = T.d()
        kg = J.dot(dT, Y)
        kn = J.dot(dT, U)
        taug = J.dot(Y.d(), U)
        k = order
        return DarbouxJets(g.truncate(k), T.truncate(k), Y.truncate(k), U.truncate(k), kg, kn, taug)


class FrenetDarboux:
    """Frenet spine rotated about T by an angle function theta(u)."""

    def __init__(self, curve, theta: Node):
        self.curve = curve
        self.theta = theta
        self.domain = curve.domain

    def frame(self, u, order: int = 3, unit_tol: float = UNIT_SPEED_TOL) -> DarbouxJets:
        fj = frenet_jets(self.curve, u, order, unit_tol)
        th = eval_jet(self.theta, u, order + 1)
        c, s = J.cos(th.truncate(order)), J.sin(th.truncate(order))
        Y = J.smul(c, fj.N1) - J.smul(s, fj.N2)
        U = J.smul(s, fj.N1) + J.smul(c, fj.N2)
        return DarbouxJets(fj.gamma, fj.T, Y, U, fj.kappa * c, fj.kappa * s, fj.tau - th.d())


def darboux_from_host(host: HostSurfaceDef, u: float, unit_tol: float = UNIT_SPEED_TOL) -> DarbouxApparatus:
    return apparatus_from_source(HostDarboux(host), u, unit_tol)


def apparatus_from_source(source, u: float, unit_tol: float = UNIT_SPEED_TOL) -> DarbouxApparatus:
    dj = source.frame(float(u), 4, unit_tol)
    res = darboux_residuals(dj.T.value, dj.Y.value, dj.U.value, dj.kg.value, dj.kn.value, dj.taug.value,
                            dj.T.d().value, dj.Y.d().value, dj.U.d().value)
    return DarbouxApparatus(
        T=dj.T.value.copy(), Y=dj.Y.value.copy(), U=dj.U.value.copy(),
        kg=float(dj.kg.value), kn=float(dj.kn.value), taug=float(dj.taug.value),
        kg_jet=dj.kg.truncate(3), kn_jet=dj.kn.truncate(3), taug_jet=dj.taug.truncate(3),
        residuals=tuple(float(r) for r in res),
    )


# finite-difference cross-checks -------------------------------------------------


def fd_frame_residuals(frame_values, u: float, h: float = 1e-3):
    """Frame-equation residuals with the frame derivatives taken by finite differences.

    ``frame_values(u)`` returns ``(v1, v2, v3, a, b, c)``: three frame vectors
    and the three scalars in the skew matrix [[0, a, b], [-a, 0, c], [-b, -c, 0]].
    This covers Frenet (a=kappa, b=0, c=tau) and Darboux (k_g, k_n, tau_g).
    """
    def pack(x):
        v1, v2, v3, *_ = frame_values(x)
        return np.concatenate([v1, v2, v3])

    d = richardson_derivatives(pack, u, h)[1]
    v1, v2, v3, a, b, c = frame_values(u)
    return darboux_residuals(v1, v2, v3, a, b, c, d[:3], d[3:6], d[6:])
