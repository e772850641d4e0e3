"""Space curves given by three closed-form component expressions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import jet as J
from .expr import Node, evaluate, parse_expr, to_text
from .jet import DomainError, Jet


@dataclass(frozen=True)
class CurveDef:
    components: tuple  # three expression trees in `var`
    domain: tuple = (-np.inf, np.inf)
    label: str = ""
    var: str = "u"

    @classmethod
    def from_strings(cls, x: str, y: str, z: str, domain=(-np.inf, np.inf), label: str = "",
                     constants: Mapping[str, float] | None = None, var: str = "u") -> "CurveDef":
        comps = tuple(parse_expr(s, (var,), constants) for s in (x, y, z))
        return cls(comps, (float(domain[0]), float(domain[1])), label, var)

    def check_domain(self, u):
        lo, hi = self.domain
        u = np.asarray(u, dtype=float)
        if np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
            raise DomainError(f"parameter outside curve domain [{lo}, {hi}]")

    def jet(self, u, order: int = 3) -> Jet:
        """Vector jet of gamma at ``u`` (scalar or array) through ``order``."""
        self.check_domain(u)
        t = Jet.variable(u, order)
        comps = []
        for c in self.components:
            val = evaluate(c, {self.var: t})
            comps.append(val if isinstance(val, Jet) else Jet.constant(np.broadcast_to(val, t.shape), order))
        return J.stack(comps)

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        cols = [np.broadcast_to(np.asarray(evaluate(c, {self.var: u}), dtype=float), u.shape) for c in self.components]
        return np.stack(cols, axis=-1)

    def describe(self) -> list:
        return [to_text(c) for c in self.components]
