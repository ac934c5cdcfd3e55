"""Fixed composite Gauss-Legendre rules.

The coverage integral evaluates every (i, u, u1..u4) term on one shared set
of outer nodes, so a fixed rule is used there instead of an adaptive one.
Convergence is checked in the test-suite by doubling the panel count.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def unit_rule(panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on [0, 1] with equal panels."""
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureOptions:
    """Resolution of the analytic engine.

    ``outer_*`` controls the serving-distance integral (log-spaced),
    ``inner_*`` the interferer-distance integrals inside the Laplace
    functional, and ``inner_decades`` how far past the exclusion radius the
    inner integral runs before the analytic tail correction takes over.
    """

    outer_panels: int = 32
    outer_order: int = 8
    inner_panels: int = 24
    inner_order: int = 8
    inner_decades: float = 6.0
    density_floor: float = 1e-15

    def doubled(self) -> "QuadratureOptions":
        return QuadratureOptions(2 * self.outer_panels, self.outer_order, 2 * self.inner_panels,
                                 self.inner_order, self.inner_decades + 2, self.density_floor * 1e-2)


def log_rule(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule for integrals in ``dx`` over [lo, hi], panels uniform in log x.

    Weights already include the Jacobian ``x``.
    """
    u, w = unit_rule(panels, order)
    a, b = np.log(lo), np.log(hi)
    x = np.exp(a + (b - a) * u)
    return x, w * (b - a) * x
