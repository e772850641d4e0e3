"""Central finite-difference oracle for expression derivatives.

Each derivative uses the standard second-order central stencil on steps ``h``
and ``2h`` followed by one Richardson level,
``D = (4 D(h) - D(2h)) / 3``, which lifts the truncation error to O(h^4).
The third-derivative stencil reaches ``u +- 2h`` so the whole oracle samples
``[u - 4h, u + 4h]``.
"""

from __future__ import annotations

import numpy as np

from .expr import Node, evaluate
from .jet import Jet

DEFAULT_STEP = 1e-3


def central_stencil(f, u, h):
    """(f, f', f'', f''') from one central stencil of step ``h``; O(h^2)."""
    f0 = np.asarray(f(u), dtype=float)
    p1, m1 = np.asarray(f(u + h)), np.asarray(f(u - h))
    p2, m2 = np.asarray(f(u + 2 * h)), np.asarray(f(u - 2 * h))
    return np.stack(
        [
            f0,
            (p1 - m1) / (2 * h),
            (p1 - 2 * f0 + m1) / h**2,
            (p2 - 2 * p1 + 2 * m1 - m2) / (2 * h**3),
        ]
    )


def richardson_derivatives(f, u, h=DEFAULT_STEP, levels=1):
    """Derivatives 0..3 of a scalar or vector function ``f`` at ``u``."""
    if h <= 0:
        raise ValueError("step must be positive")
    if levels == 0:
        return central_stencil(f, u, h)
    fine = richardson_derivatives(f, u, h, levels - 1)
    coarse = richardson_derivatives(f, u, 2 * h, levels - 1)
    w = 4.0**levels
    out = (w * fine - coarse) / (w - 1)
    out[0] = fine[0]
    return out


def fd_jet3(tree: Node, u: float, h: float = DEFAULT_STEP, levels: int = 1, var: str = "u") -> Jet:
    """Finite-difference estimate of the order-3 jet of ``tree`` at ``u``."""
    d = richardson_derivatives(lambda x: evaluate(tree, {var: x}), u, h, levels)
    return Jet.from_derivatives(d)
