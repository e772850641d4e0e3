"""Parametric surface engine: fundamental forms, normals and curvatures.

A *surface evaluator* is any callable ``surface(u, v, du, dv, order)`` that
returns the position along the line ``(u + du*t, v + dv*t)`` as a vector jet
in ``t``.  Partial derivatives are read off four directional jets; the mixed
partial comes from polarisation, computed two ways so symmetry can be checked.

All functions broadcast over arrays of parameter values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_REG = 1e-10
UMBILIC_CLAMP = 1e-12


class SingularPoint(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceJet:
    X: np.ndarray
    X_u: np.ndarray
    X_v: np.ndarray
    X_uu: np.ndarray
    X_uv: np.ndarray
    X_vv: np.ndarray
    X_vu: np.ndarray | None = None

    def mixed_asymmetry(self) -> np.ndarray:
        if self.X_vu is None:
            return np.zeros(self.X.shape[:-1])
        return np.linalg.norm(self.X_uv - self.X_vu, axis=-1)


@dataclass(frozen=True)
class FundamentalForms:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    W2: np.ndarray
    l: np.ndarray
    m: np.ndarray
    n: np.ndarray
    N: np.ndarray

    def flipped(self, sign) -> "FundamentalForms":
        """Same forms with the normal multiplied by ``sign``."""
        s = np.asarray(sign, dtype=float)
        return FundamentalForms(self.E, self.F, self.G, self.W2, s * self.l, s * self.m, s * self.n,
                                s[..., None] * self.N)


@dataclass(frozen=True)
class CurvatureSummary:
    K: np.ndarray
    H: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    shape: np.ndarray  # (..., 2, 2)


def _second(j):
    return 2.0 * j.c[2]


def surface_jet(surface, u, v) -> SurfaceJet:
    """First and second partials of ``surface`` at ``(u, v)`` by jet evaluation."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    ju = surface(u, v, 1.0, 0.0, 2)
    jv = surface(u, v, 0.0, 1.0, 2)
    jp = surface(u, v, 1.0, 1.0, 2)
    jm = surface(u, v, 1.0, -1.0, 2)
    X_uu, X_vv = _second(ju), _second(jv)
    Dp, Dm = _second(jp), _second(jm)
    return SurfaceJet(
        X=ju.c[0], X_u=ju.c[1], X_v=jv.c[1],
        X_uu=X_uu, X_uv=(Dp - Dm) / 4.0, X_vv=X_vv,
        X_vu=(Dp - X_uu - X_vv) / 2.0,
    )


def fd_surface_jet(position, u, v, h: float = 1e-3) -> SurfaceJet:
    """Finite-difference partials of a position map, one Richardson level.

    ``position(u, v)`` must accept arrays and return ``(..., 3)``.
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))

    def stencil(k):
        P = lambda a, b: np.asarray(position(u + a * k, v + b * k))
        x0 = P(0, 0)
        xu = (P(1, 0) - P(-1, 0)) / (2 * k)
        xv = (P(0, 1) - P(0, -1)) / (2 * k)
        xuu = (P(1, 0) - 2 * x0 + P(-1, 0)) / k**2
        xvv = (P(0, 1) - 2 * x0 + P(0, -1)) / k**2
        xuv = (P(1, 1) - P(1, -1) - P(-1, 1) + P(-1, -1)) / (4 * k**2)
        return x0, xu, xv, xuu, xuv, xvv

    fine, coarse = stencil(h), stencil(2 * h)
    ext = [fine[0]] + [(4 * a - b) / 3 for a, b in zip(fine[1:], coarse[1:])]
    return SurfaceJet(*ext)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def fundamental_forms(j: SurfaceJet, eps_reg: float = EPS_REG, strict: bool = True) -> FundamentalForms:
    """First/second fundamental form coefficients and the unit normal X_u x X_v.

    With ``strict`` a singular point raises :class:`SingularPoint`; otherwise
    singular entries come back as NaN.
    """
    E, F, G = _dot(j.X_u, j.X_u), _dot(j.X_u, j.X_v), _dot(j.X_v, j.X_v)
    W2 = E * G - F * F
    singular = W2 <= eps_reg**2
    if strict and np.any(singular):
        raise SingularPoint(f"W^2 = EG - F^2 = {np.min(W2):.3e} is not above {eps_reg**2:.1e}")
    cr = np.cross(j.X_u, j.X_v)
    nrm = np.linalg.norm(cr, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        N = cr / np.where(singular, np.nan, nrm)[..., None]
    return FundamentalForms(E, F, G, W2, _dot(j.X_uu, N), _dot(j.X_uv, N), _dot(j.X_vv, N), N)


def curvatures(f: FundamentalForms) -> CurvatureSummary:
    E, F, G, W2, l, m, n = f.E, f.F, f.G, f.W2, f.l, f.m, f.n
    K = (l * n - m * m) / W2
    H = (E * n + G * l - 2 * F * m) / (2 * W2)
    rad = H * H - K
    rad = np.where((rad < 0) & (rad >= -UMBILIC_CLAMP), 0.0, rad)
    root = np.sqrt(rad)
    W = np.sqrt(W2)
    off = (m - F / E * l) / W
    shape = np.stack(
        [np.stack([l / E, off], axis=-1), np.stack([off, (E * n - 2 * F * m + F * F / E * l) / W2], axis=-1)],
        axis=-2,
    )
    return CurvatureSummary(K, H, H + root, H - root, shape)


def classify_point(j: SurfaceJet, f: FundamentalForms, direction: str):
    """(normal curvature component, geodesic residual) of a parameter curve.

    Asymptotic iff the first vanishes; geodesic iff the second vanishes.
    """
    if np.any(~np.isfinite(f.N)):
        raise SingularPoint("classification at a singular point")
    if direction in ("u", "u-curve"):
        acc, comp = j.X_uu, f.l
    elif direction in ("v", "v-curve"):
        acc, comp = j.X_vv, f.n
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return comp, np.linalg.norm(np.cross(acc, f.N), axis=-1)


def scaled_error(x, y, rtol: float, atol: float) -> np.ndarray:
    """|x - y| in units of the allowed error max(rtol * max(|x|, |y|), atol); <= 1 passes."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    allowed = np.maximum(rtol * np.maximum(np.abs(x), np.abs(y)), atol)
    return np.abs(x - y) / allowed


def match_principal(pair_a, pair_b, rtol: float = 1e-8, atol: float = 1e-12) -> np.ndarray:
    """Scaled deviation between two unordered pairs of principal curvatures.

    The pairs are matched whichever way gives the smaller deviation, so the
    comparison is set equality and ignores ordering conventions.
    """
    a1, a2 = pair_a
    b1, b2 = pair_b
    straight = np.maximum(scaled_error(a1, b1, rtol, atol), scaled_error(a2, b2, rtol, atol))
    swapped = np.maximum(scaled_error(a1, b2, rtol, atol), scaled_error(a2, b1, rtol, atol))
    return np.minimum(straight, swapped)


def orientation_sign(N_numeric, N_reference) -> np.ndarray:
    """+1 where the two unit normals agree, -1 where they are opposite."""
    return np.sign(_dot(N_numeric, N_reference))
