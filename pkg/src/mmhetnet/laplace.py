"""Laplace transforms of the SDINR denominator terms and their derivatives.

The estimation-error and distortion powers are scaled Gamma variables with
closed-form transforms. The other-cell interference transform comes from the
PPP probability generating functional; its derivatives are obtained by
differentiating the exponent under the integral and applying the recursion
``L^(n) = sum_m C(n-1, m) g^(m+1) L^(n-1-m)`` for ``L = exp(g)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb, poch

from . import kernels
from .config import NetworkConfig, TierParams
from .geometry import LOS, NLOS, exclusion_radius
from .impairments import error_power_scale
from .quadrature import QuadratureOptions, unit_rule
from .sdinr import directivity_pmf


@dataclass(frozen=True)
class GammaLaplace:
    """E[exp(-s X)] = (1 + c s)^-k for X ~ Gamma(k, c)."""

    shape: float
    scale: float

    def __call__(self, s):
        return gamma_laplace_deriv(self, s, 0)


def gamma_laplace_deriv(gl: GammaLaplace, s, order: int):
    """d^u/ds^u (1 + c s)^-k = (-c)^u (k)_u (1 + c s)^-(k + u)."""
    s = np.asarray(s, dtype=float)
    c, k = gl.scale, gl.shape
    if order == 0:
        return (1.0 + c * s) ** -k
    return (-c) ** order * poch(k, order) * (1.0 + c * s) ** -(k + order)


def impairment_transforms(tier: TierParams, beta_z: float) -> tuple[GammaLaplace, GammaLaplace, GammaLaplace]:
    """Transforms of the estimation error and the transmit/receive distortion powers."""
    err_scale = beta_z * error_power_scale(tier) * tier.error_variance
    return (GammaLaplace(tier.users_per_bs, err_scale),
            GammaLaplace(tier.antennas, beta_z * tier.tx_impairment**2),
            GammaLaplace(tier.antennas, beta_z * tier.rx_impairment**2))


@dataclass(frozen=True)
class InterfererClasses:
    """Flattened (tier j, link state, gain class k) table of interferers seen from a server."""

    tier: np.ndarray
    los: np.ndarray
    q: np.ndarray         # s-coefficient of one interferer's mean-free power: a P C theta_g
    pref: np.ndarray      # 2 pi lambda_j b_k
    shape: np.ndarray
    alpha: np.ndarray
    blockage: np.ndarray

    def exclusion(self, cfg: NetworkConfig, w: int, los: bool, x) -> np.ndarray:
        """Exclusion radii, shape (len(x), n_classes)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((len(x), len(self.q)))
        for c in range(len(self.q)):
            out[:, c] = exclusion_radius(cfg, w, los, x, int(self.tier[c]), bool(self.los[c]))
        return out


def interferer_classes(cfg: NetworkConfig) -> InterfererClasses:
    cols: dict[str, list] = {k: [] for k in ("tier", "los", "q", "pref", "shape", "alpha", "blockage")}
    for j, t in enumerate(cfg.tiers):
        pmf = directivity_pmf(t.tx_beam, cfg.rx_beam)
        theta = cfg.interferer_scale(t.users_per_bs)
        for los in (LOS, NLOS):
            for a, b in zip(pmf.gains, pmf.probs):
                cols["tier"].append(j)
                cols["los"].append(los)
                cols["q"].append(a * t.per_user_power * t.intercept(los) * theta)
                cols["pref"].append(2 * math.pi * t.outdoor_density * b)
                cols["shape"].append(t.users_per_bs)
                cols["alpha"].append(t.exponent(los))
                cols["blockage"].append(t.blockage_rate)
    return InterfererClasses(np.array(cols["tier"]), np.array(cols["los"], dtype=bool),
                             *(np.array(cols[k], dtype=float) for k in ("q", "pref", "shape", "alpha", "blockage")))


def exponent_derivatives(cfg: NetworkConfig, w: int, los: bool, x, s, max_order: int,
                         opts: QuadratureOptions = QuadratureOptions(),
                         classes: InterfererClasses | None = None) -> np.ndarray:
    """Derivatives of log L_I at ``s`` for a tier-``w`` server at distances ``x``.

    Shape ``(len(x), max_order + 1)``; column 0 is log L_I itself.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), x.shape)
    cl = classes if classes is not None else interferer_classes(cfg)
    nodes, weights = unit_rule(opts.inner_panels, opts.inner_order)
    return kernels.pgfl_exponent_derivs(s, cl.exclusion(cfg, w, los, x), cl.q, cl.pref, cl.shape,
                                        cl.alpha, cl.blockage, cl.los, nodes, weights,
                                        opts.inner_decades, max_order)


def derivative_ratios(g: np.ndarray) -> np.ndarray:
    """L^(n) / L from exponent derivatives ``g[..., m] = g^(m)``, via the exp recursion."""
    n_max = g.shape[-1] - 1
    r = np.zeros_like(g)
    r[..., 0] = 1.0
    for n in range(1, n_max + 1):
        acc = np.zeros(g.shape[:-1])
        for m in range(n):
            acc = acc + comb(n - 1, m, exact=True) * g[..., m + 1] * r[..., n - 1 - m]
        r[..., n] = acc
    return r


@dataclass
class InterferenceLaplace:
    cfg: NetworkConfig
    tier: int
    los: bool
    distance: float
    s: float
    max_order: int
    opts: QuadratureOptions = field(default_factory=QuadratureOptions)
    exponent: np.ndarray = field(init=False)

    def __post_init__(self):
        self.exponent = exponent_derivatives(self.cfg, self.tier, self.los, [self.distance], [self.s],
                                             self.max_order, self.opts)[0]
        self._ratios = derivative_ratios(self.exponent)

    @property
    def log_value(self) -> float:
        return float(self.exponent[0])

    @property
    def value(self) -> float:
        return math.exp(self.exponent[0])

    def deriv(self, order: int) -> float:
        if order > self.max_order:
            raise ValueError(f"order {order} > max_order {self.max_order}")
        return float(self.value * self._ratios[order])


def interference_laplace(cfg: NetworkConfig, w: int, los: bool, x: float, s: float, max_order: int = 0,
                         opts: QuadratureOptions = QuadratureOptions()) -> InterferenceLaplace:
    if s < 0 or x <= 0:
        raise ValueError("need s >= 0 and x > 0")
    return InterferenceLaplace(cfg, w, los, float(x), float(s), max_order, opts)


def interference_laplace_deriv(il: InterferenceLaplace, s: float, order: int) -> float:
    if s != il.s or order > il.max_order:
        il = InterferenceLaplace(il.cfg, il.tier, il.los, il.distance, float(s), max(order, il.max_order), il.opts)
    return il.deriv(order)
