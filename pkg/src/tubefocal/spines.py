"""Spines reconstructed from curvature data, and frames integrated from their ODE.

:class:`SampledSpine` turns a curvature function kappa(u) into a planar
unit-speed curve, ``theta = int kappa``, ``gamma = int (cos theta, sin theta, 0)``.
Positions come from adaptive quadrature; derivatives never do.  They follow
from the kappa jet: ``theta' = kappa`` and ``gamma' = (cos theta, sin theta, 0)``,
so the recomputed Frenet curvature is the input kappa up to rounding.

:class:`IntegratedDarboux` does the same for a Darboux frame with prescribed
``k_g``, ``k_n``, ``tau_g``: values from an ODE solve, Taylor coefficients from
the frame equations themselves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import framekit as fk
from .exprcurve import jet as J
from .exprcurve.expr import Node, eval_jet, evaluate, parse_expr
from .exprcurve.jet import Jet

QUAD_TOL = 1e-10
MIN_NODES = 16
_GL_X, _GL_W = zip(*(np.polynomial.legendre.leggauss(k) for k in (16, 24)))


class QuadratureFailure(RuntimeError):
    pass


def _quad(f, a, b):
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=1e-13, epsrel=QUAD_TOL, limit=200)
        except (integrate.IntegrationWarning, ValueError, ZeroDivisionError) as exc:
            raise QuadratureFailure(f"quadrature on [{a}, {b}] failed: {exc}") from exc
    if not np.isfinite(val):
        raise QuadratureFailure(f"non-finite integral on [{a}, {b}]")
    return val


class SampledSpine:
    """Planar unit-speed curve with prescribed curvature, usable wherever a CurveDef is."""

    def __init__(self, kappa: Node, u0: float, span, n: int = 64, label: str = ""):
        if n < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
        lo, hi = float(span[0]), float(span[1])
        if not lo < hi or not lo <= u0 <= hi:
            raise ValueError("span must be a nonempty interval containing u0")
        self.kappa = kappa
        self.u0 = float(u0)
        self.domain = (lo, hi)
        self.label = label
        self._k = lambda s: float(evaluate(kappa, {"u": s}))
        nodes = np.unique(np.concatenate([np.linspace(lo, hi, n), [self.u0]]))
        self.nodes = nodes
        i0 = int(np.searchsorted(nodes, self.u0))
        theta = np.zeros(len(nodes))
        xy = np.zeros((len(nodes), 2))
        for i in range(i0 + 1, len(nodes)):
            theta[i], xy[i] = self._step(nodes[i - 1], theta[i - 1], xy[i - 1], nodes[i])
        for i in range(i0 - 1, -1, -1):
            theta[i], xy[i] = self._step(nodes[i + 1], theta[i + 1], xy[i + 1], nodes[i])
        self._theta, self._xy = theta, xy
        self._cache: dict = {}

    def _theta_from(self, a, th_a, s):
        # inner integral: two Gauss-Legendre rules, adaptive fallback if they disagree
        half = 0.5 * (s - a)
        mid = 0.5 * (s + a)
        fine, coarse = (half * float(np.dot(w, np.broadcast_to(evaluate(self.kappa, {"u": mid + half * x}), x.shape)))
                        for x, w in zip(_GL_X[::-1], _GL_W[::-1]))
        if abs(fine - coarse) > 1e-13 * max(1.0, abs(fine)):
            return th_a + _quad(self._k, a, s)
        return th_a + fine

    def _step(self, a, th_a, xy_a, b):
        th_b = self._theta_from(a, th_a, b)
        if a == b:
            return th_b, xy_a.copy()
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                xy, _ = integrate.quad_vec(
                    lambda s: (lambda t: np.array([np.cos(t), np.sin(t)]))(self._theta_from(a, th_a, s)),
                    a, b, epsabs=1e-13, epsrel=QUAD_TOL)
            except (integrate.IntegrationWarning, ValueError, ZeroDivisionError) as exc:
                raise QuadratureFailure(f"quadrature on [{a}, {b}] failed: {exc}") from exc
        if not np.all(np.isfinite(xy)):
            raise QuadratureFailure(f"non-finite integral on [{a}, {b}]")
        return th_b, xy_a + xy

    def _point(self, u: float):
        hit = self._cache.get(u)
        if hit is None:
            i = int(np.clip(np.searchsorted(self.nodes, u) - 1, 0, len(self.nodes) - 1))
            if abs(self.nodes[min(i + 1, len(self.nodes) - 1)] - u) < abs(self.nodes[i] - u):
                i = min(i + 1, len(self.nodes) - 1)
            hit = self._step(self.nodes[i], self._theta[i], self._xy[i], u)
            self._cache[u] = hit
        return hit

    def check_domain(self, u):
        lo, hi = self.domain
        u = np.asarray(u, dtype=float)
        if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
            raise J.DomainError(f"parameter outside spine span [{lo}, {hi}]")

    def theta(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        self.check_domain(u)
        uniq, inv = np.unique(u.ravel(), return_inverse=True)
        vals = np.array([self._point(float(x))[0] for x in uniq])
        return vals[inv].reshape(u.shape)

    def __call__(self, u) -> np.ndarray:
        return self.jet(u, 0).value

    def jet(self, u, order: int = 3) -> Jet:
        u = np.asarray(u, dtype=float)
        self.check_domain(u)
        uniq, inv = np.unique(u.ravel(), return_inverse=True)
        pts = [self._point(float(x)) for x in uniq]
        th0 = np.array([p[0] for p in pts])[inv].reshape(u.shape)
        xy0 = np.array([p[1] for p in pts]).reshape(-1, 2)[inv].reshape(u.shape + (2,))
        k = eval_jet(self.kappa, u, max(order - 2, 0))
        theta = k.integrate(th0)
        dgamma = J.stack([J.cos(theta), J.sin(theta), 0.0])
        g0 = np.concatenate([xy0, np.zeros(u.shape + (1,))], axis=-1)
        return dgamma.integrate(g0).truncate(order)

    def describe(self) -> list:
        return [f"kappa-integrated spine from u0={self.u0}"]


def spine_from_curvature(kappa, u0: float, span, n: int = 64) -> SampledSpine:
    """Planar unit-speed spine whose curvature is ``kappa`` (tree or text in u)."""
    tree = parse_expr(kappa) if isinstance(kappa, str) else kappa
    return SampledSpine(tree, u0, span, n)


# curvature families ---------------------------------------------------------------


@dataclass(frozen=True)
class SpineFamilyParams:
    c: float = 1.0
    c1: float = 0.0
    c2: float = 0.0


def cmc_kappa(p: SpineFamilyParams, sign: float = 1.0) -> Node:
    """kappa with constant focal mean curvature ``c``: +-sqrt((u + c1 c) c)/(u + c1 c)."""
    if p.c == 0:
        raise ValueError("CMC family needs c != 0")
    a = repr(p.c1 * p.c)
    s = "" if sign > 0 else "-"
    return parse_expr(f"{s}sqrt((u + {a}) * {p.c!r}) / (u + {a})")


def geodesic_kappa(p: SpineFamilyParams) -> Node:
    """kappa making the focal u-curves geodesic: -1/(c1 u + c2)."""
    if p.c1 == 0 and p.c2 == 0:
        raise ValueError("geodesic family needs c1 or c2 nonzero")
    return parse_expr(f"-1 / ({p.c1!r} * u + {p.c2!r})")


# Darboux frame from its ODE --------------------------------------------------------


def _skew(kg, kn, tg):
    """Coefficient arrays of A with M' = A M for rows M = (T, Y, U)."""
    z = np.zeros_like(kg)
    return np.stack([np.stack([z, kg, kn], -1), np.stack([-kg, z, tg], -1), np.stack([-kn, -tg, z], -1)], -2)


class IntegratedDarboux:
    """Darboux source for prescribed (k_g, k_n, tau_g), integrated from a starting frame."""

    def __init__(self, kg: Node, kn: Node, taug: Node, u0: float, span, gamma0=(0.0, 0.0, 0.0),
                 frame0=None, rtol: float = 1e-12, atol: float = 1e-13):
        self.kg, self.kn, self.taug = kg, kn, taug
        self.u0 = float(u0)
        self.domain = (float(span[0]), float(span[1]))
        M0 = np.eye(3) if frame0 is None else np.asarray(frame0, dtype=float)
        y0 = np.concatenate([np.asarray(gamma0, dtype=float), M0.ravel()])
        self.curve = self
        self._sols = {}
        for end in self.domain:
            if end != self.u0:
                self._sols[end > self.u0] = integrate.solve_ivp(
                    self._rhs, (self.u0, end), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        self._y0 = y0

    def _rhs(self, u, y):
        e = {"u": u}
        A = _skew(*(np.asarray(float(evaluate(t, e))) for t in (self.kg, self.kn, self.taug)))
        M = y[3:].reshape(3, 3)
        return np.concatenate([M[0], (A @ M).ravel()])

    def _state(self, u):
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape + (12,))
        flat, res = u.ravel(), out.reshape(-1, 12)
        for i, x in enumerate(flat):
            res[i] = self._y0 if x == self.u0 else self._sols[x > self.u0].sol(x)
        return out

    def jet(self, u, order: int = 3) -> Jet:
        return self.frame(u, order).gamma

    def __call__(self, u):
        return self._state(u)[..., :3]

    def frame(self, u, order: int = 3, unit_tol: float = fk.UNIT_SPEED_TOL) -> fk.DarbouxJets:
        u = np.asarray(u, dtype=float)
        lo, hi = self.domain
        if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
            raise J.DomainError(f"parameter outside frame span [{lo}, {hi}]")
        st = self._state(u)
        n = order + 1
        kgj, knj, tgj = (eval_jet(t, u, n) for t in (self.kg, self.kn, self.taug))
        A = _skew(kgj.c, knj.c, tgj.c)  # (n+1, ..., 3, 3)
        M = [st[..., 3:].reshape(u.shape + (3, 3))]
        for k in range(n):
            acc = sum(A[i] @ M[k - i] for i in range(k + 1))
            M.append(acc / (k + 1))
        Mc = np.stack(M)
        g = Jet(Mc[:, ..., 0, :]).integrate(st[..., :3])
        return fk.DarbouxJets(
            g.truncate(order), Jet(Mc[: order + 1, ..., 0, :]), Jet(Mc[: order + 1, ..., 1, :]),
            Jet(Mc[: order + 1, ..., 2, :]), kgj.truncate(order), knj.truncate(order), tgj.truncate(order),
        )
