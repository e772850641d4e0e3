"""Truncated Taylor jets for forward-mode differentiation.

A :class:`Jet` stores Taylor coefficients ``c[k] = f^(k)(t0) / k!`` of a
function of one parameter, truncated at a fixed order.  Coefficients may carry
trailing array dimensions, so one jet can represent a whole batch of points or
a 3-vector field (last axis of length 3).

The public differentiation currency is the order-3 jet (``Jet3``); deeper
orders are used internally where a quantity needs derivatives of derivatives,
e.g. curvature rates built from the fourth derivative of a curve.
"""

from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """Raised when an elementary function is evaluated outside its domain."""


def _align(a: np.ndarray, b: np.ndarray):
    """Right-align value dimensions of two coefficient arrays (axis 0 is order)."""
    da, db = a.ndim, b.ndim
    if da < db:
        a = a.reshape((a.shape[0],) + (1,) * (db - da) + a.shape[1:])
    elif db < da:
        b = b.reshape((b.shape[0],) + (1,) * (da - db) + b.shape[1:])
    return a, b


def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(k) for k in range(order + 1)], dtype=float)


class Jet:
    """Value and derivatives through ``order`` of a function of one parameter."""

    __slots__ = ("c",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            raise ValueError("jet needs at least one coefficient")

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, value, order: int, slope=1.0) -> "Jet":
        """Seed ``t -> value + slope * t``."""
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        if order >= 1:
            c[1] = slope
        return cls(c)

    @classmethod
    def from_derivatives(cls, derivs) -> "Jet":
        d = np.asarray(derivs, dtype=float)
        fac = _factorials(d.shape[0] - 1).reshape((-1,) + (1,) * (d.ndim - 1))
        return cls(d / fac)

    # inspection -------------------------------------------------------------

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.c.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        fac = _factorials(self.order).reshape((-1,) + (1,) * len(self.shape))
        return self.c * fac

    def deriv(self, k: int):
        return self.c[k] * math.factorial(k)

    @property
    def f(self):
        return self.c[0]

    @property
    def f1(self):
        return self.deriv(1)

    @property
    def f2(self):
        return self.deriv(2)

    @property
    def f3(self):
        return self.deriv(3)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, derivs={self.derivatives().tolist()})"

    def __getitem__(self, idx) -> "Jet":
        """Index the value dimensions (not the order axis)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.c[(slice(None),) + idx])

    # calculus on the jet itself --------------------------------------------

    def d(self) -> "Jet":
        """Derivative with respect to the jet parameter, one order lower."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = np.arange(1, self.order + 1, dtype=float)
        k = k.reshape((-1,) + (1,) * len(self.shape))
        return Jet(self.c[1:] * k)

    def integrate(self, value0) -> "Jet":
        """Antiderivative with constant term ``value0``, one order higher."""
        k = np.arange(1, self.order + 2, dtype=float)
        k = k.reshape((-1,) + (1,) * len(self.shape))
        tail = self.c / k
        head = np.broadcast_to(np.asarray(value0, dtype=float), self.shape)[None]
        return Jet(np.concatenate([head, tail], axis=0))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"jet has order {self.order}, asked for {order}")
        return Jet(self.c[: order + 1])

    def rescale(self, slope) -> "Jet":
        """Re-express a jet in ``s`` as a jet in ``t`` where ``s = slope * t``."""
        p = np.asarray(slope, dtype=float) ** np.arange(self.order + 1)
        return Jet(self.c * p.reshape((-1,) + (1,) * len(self.shape)))

    def expand(self) -> "Jet":
        """Append a unit trailing axis so a scalar jet broadcasts against vectors."""
        return Jet(self.c[..., None])

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        n = min(self.order, o.order)
        a, b = _align(self.c[: n + 1], o.c[: n + 1])
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            a, b = _align(self.c, np.asarray(other, dtype=float)[None])
            return Jet(a * b)
        n = min(self.order, other.order)
        a, b = _align(self.c, other.c)
        out = [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n + 1)]
        return Jet(np.stack(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            a, b = _align(self.c, np.asarray(other, dtype=float)[None])
            return Jet(a / b)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return self._coerce(other) * reciprocal(self)

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents must be constants")
        return power(self, float(p))


def compose(derivs_at_value, inner: Jet) -> Jet:
    """Evaluate ``f(inner)`` from the derivatives ``f^(k)`` at ``inner.value``.

    ``derivs_at_value[k]`` must hold ``f^(k)(inner.value)`` for ``k`` up to
    ``inner.order``; extra entries are ignored.
    """
    order = inner.order
    delta = Jet(np.concatenate([np.zeros_like(inner.c[:1]), inner.c[1:]]))
    fac = _factorials(order)
    acc = Jet.constant(np.asarray(derivs_at_value[order]) / fac[order] + 0 * inner.c[0], order)
    for k in range(order - 1, -1, -1):
        acc = acc * delta + np.asarray(derivs_at_value[k]) / fac[k]
    return acc


def _check(cond, msg):
    if np.any(cond):
        raise DomainError(msg)


def sin(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    cyc = [s, c, -s, -c]
    return compose([cyc[k % 4] for k in range(x.order + 1)], x)


def cos(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    cyc = [c, -s, -c, s]
    return compose([cyc[k % 4] for k in range(x.order + 1)], x)


def tan(x: Jet) -> Jet:
    _check(np.abs(np.cos(x.value)) < 1e-12, "tan evaluated at a pole")
    return sin(x) / cos(x)


def exp(x: Jet) -> Jet:
    e = np.exp(x.value)
    return compose([e] * (x.order + 1), x)


def log(x: Jet) -> Jet:
    a = x.value
    _check(a <= 0, "ln of a nonpositive value")
    d = [np.log(a)]
    for k in range(1, x.order + 1):
        d.append((-1) ** (k - 1) * math.factorial(k - 1) / a**k)
    return compose(d, x)


def power(x: Jet, p: float) -> Jet:
    a = x.value
    if float(p).is_integer() and p >= 0:
        n = int(p)
        d, coef = [], 1.0
        for k in range(x.order + 1):
            d.append(coef * a ** (n - k) if k <= n else np.zeros_like(a))
            coef *= n - k
        return compose(d, x)
    if float(p).is_integer():
        _check(a == 0, "negative power of zero")
    else:
        _check(a <= 0, "fractional power of a nonpositive value")
    d, coef = [], 1.0
    for k in range(x.order + 1):
        d.append(coef * a ** (p - k))
        coef *= p - k
    return compose(d, x)


def sqrt(x: Jet) -> Jet:
    return power(x, 0.5)


def reciprocal(x: Jet) -> Jet:
    _check(x.value == 0, "division by zero")
    return power(x, -1.0)


# vector helpers (last axis is the spatial one) ------------------------------


def dot(a: Jet, b: Jet) -> Jet:
    n = min(a.order, b.order)
    ac, bc = _align(a.c, b.c)
    out = [sum(np.sum(ac[i] * bc[k - i], axis=-1) for i in range(k + 1)) for k in range(n + 1)]
    return Jet(np.stack(out))


def cross(a: Jet, b: Jet) -> Jet:
    n = min(a.order, b.order)
    ac, bc = _align(a.c, b.c)
    out = [sum(np.cross(ac[i], bc[k - i]) for i in range(k + 1)) for k in range(n + 1)]
    return Jet(np.stack(out))


def norm(a: Jet) -> Jet:
    return sqrt(dot(a, a))


def normalize(a: Jet) -> Jet:
    return a * reciprocal(norm(a)).expand()


def smul(s, v: Jet) -> Jet:
    """Scalar jet (or array) times vector jet."""
    if isinstance(s, Jet):
        return s.expand() * v
    return v * np.asarray(s, dtype=float)[..., None]


def stack(components) -> Jet:
    """Assemble a vector jet from scalar jets (or constants)."""
    jets = [c for c in components if isinstance(c, Jet)]
    if not jets:
        raise ValueError("stack needs at least one jet component")
    n = min(j.order for j in jets)
    shape = np.broadcast_shapes(*(j.shape for j in jets))
    cols = []
    for comp in components:
        j = comp if isinstance(comp, Jet) else Jet.constant(np.broadcast_to(comp, shape), n)
        c = j.c[: n + 1]
        c = c.reshape(c.shape[:1] + (1,) * (len(shape) - c.ndim + 1) + c.shape[1:])
        cols.append(np.broadcast_to(c, (n + 1,) + shape))
    return Jet(np.stack(cols, axis=-1))


Jet3 = Jet
