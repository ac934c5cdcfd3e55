"""Coverage probability and area spectral efficiency from the Laplace machinery.

Conditioned on a tier-``w`` server of link state ``z`` at distance ``x``, the
desired power is Gamma(Delta, sigma_h^2) with integer shape, so

    P(Z > y) = exp(-y / sigma_h^2) sum_{i < Delta} (y / sigma_h^2)^i / i!

with ``y = T (E + D_t + D_r + xi^2 + I) / beta``. Expanding the i-th power of
the sum multinomially and using E[exp(-sX) (sX)^n] = (-s)^n L_X^(n)(s)
gives a finite sum of products, one factor per denominator term, evaluated
at ``s = T / (beta(x) sigma_h^2)``. Every factor is non-negative, so the sum
has no cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .config import NetworkConfig
from .geometry import LOS, NLOS, serving_density, serving_support
from .impairments import AgingDomainError, error_power_scale
from .laplace import GammaLaplace, derivative_ratios, exponent_derivatives, gamma_laplace_deriv, interferer_classes
from .quadrature import QuadratureOptions, log_rule


def compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def term_index(shape: int):
    """(i, u, u1, u2, u3, u4) for every summand of a Gamma(shape) desired power."""
    for i in range(shape):
        for u in range(i + 1):
            for us in compositions(i - u, 4):
                yield (i, u) + us


def _gamma_factors(shape: float, cs: float, n_max: int) -> np.ndarray:
    """(-s)^n L^(n)(s) / n! for L = (1 + c s)^-shape, as a function of c s only."""
    gl = GammaLaplace(shape, cs)
    return np.array([(-1.0) ** n * float(gamma_laplace_deriv(gl, 1.0, n)) / math.factorial(n)
                     for n in range(n_max + 1)])


@dataclass
class ConditionalTerms:
    """Per-node factors of the conditional coverage for one (tier, link state)."""

    x: np.ndarray
    s: np.ndarray
    error: np.ndarray          # (n_max + 1,) constant in x
    tx: np.ndarray
    rx: np.ndarray
    atn: np.ndarray            # (len(x), n_max + 1)
    interference: np.ndarray   # (len(x), n_max + 1)

    def group(self, idx) -> np.ndarray:
        _, u, u1, u2, u3, u4 = idx
        return self.error[u1] * self.tx[u2] * self.rx[u3] * self.atn[:, u4] * self.interference[:, u]

    def coverage(self, shape: int) -> np.ndarray:
        return sum(self.group(idx) for idx in term_index(shape))


def serving_beta(cfg: NetworkConfig, w: int, los: bool, x) -> np.ndarray:
    t = cfg.tiers[w]
    gain = cfg.rx_beam.main_lobe_gain * t.tx_beam.main_lobe_gain
    return gain * t.per_user_power * t.intercept(los) * np.asarray(x, dtype=float) ** -t.exponent(los)


def conditional_terms(cfg: NetworkConfig, w: int, los: bool, x, opts: QuadratureOptions = QuadratureOptions(),
                      classes=None) -> ConditionalTerms:
    """Factors at serving distances ``x``. Raises AgingDomainError when |delta| is too small."""
    t = cfg.tiers[w]
    n_max = t.sdinr_shape - 1
    x = np.atleast_1d(np.asarray(x, dtype=float))
    var_h = cfg.estimated_channel_variance
    s = t.target_sdinr / (serving_beta(cfg, w, los, x) * var_h)
    # beta(x) cancels in c * s for the Gamma-distributed terms
    unit = t.target_sdinr / var_h
    err = _gamma_factors(t.users_per_bs, unit * error_power_scale(t) * t.error_variance, n_max)
    tx = _gamma_factors(t.antennas, unit * t.tx_impairment**2, n_max)
    rx = _gamma_factors(t.antennas, unit * t.rx_impairment**2, n_max)
    a = s * t.atn_variance
    n = np.arange(n_max + 1)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    atn = np.exp(-a[:, None] + n[None, :] * np.log(a[:, None]) - np.log(fact)[None, :])
    g = exponent_derivatives(cfg, w, los, x, s, n_max, opts, classes)
    ratios = derivative_ratios(g)
    interf = np.exp(g[:, :1]) * (-s[:, None]) ** n[None, :] * ratios / fact[None, :]
    return ConditionalTerms(x, s, err, tx, rx, atn, interf)


def coverage_at_distance(cfg: NetworkConfig, w: int, los: bool, x, opts: QuadratureOptions = QuadratureOptions()):
    """P(SDINR > T_w) for a server of tier ``w`` and state ``los`` at distance ``x``."""
    try:
        terms = conditional_terms(cfg, w, los, x, opts)
    except AgingDomainError:
        return np.zeros(np.shape(np.atleast_1d(x)))
    return terms.coverage(cfg.tiers[w].sdinr_shape)


@dataclass
class ConditionalCoverage:
    tier: int
    los: bool
    value: float
    groups: dict = field(default_factory=dict)
    domain_error: bool = False


def _integrate_conditional(cfg, w, los, opts, support, classes) -> ConditionalCoverage:
    t = cfg.tiers[w]
    x, wts = log_rule(*support, opts.outer_panels, opts.outer_order)
    dens = serving_density(cfg, w, los, x)
    keep = dens * wts > 0
    x, wts, dens = x[keep], wts[keep], dens[keep]
    try:
        terms = conditional_terms(cfg, w, los, x, opts, classes)
    except AgingDomainError:
        return ConditionalCoverage(w, los, 0.0, {}, True)
    measure = wts * dens
    groups = {idx: math.fsum(measure * terms.group(idx)) for idx in term_index(t.sdinr_shape)}
    return ConditionalCoverage(w, los, math.fsum(groups.values()), groups)


def coverage_conditional(cfg: NetworkConfig, w: int, los: bool, opts: QuadratureOptions = QuadratureOptions()) -> float:
    """Contribution of a tier-``w`` server with link state ``los`` to the coverage probability."""
    return _integrate_conditional(cfg, w, los, opts, serving_support(cfg, opts.density_floor),
                                  interferer_classes(cfg)).value


@dataclass
class CoverageResult:
    per_tier_los: np.ndarray
    per_tier_nlos: np.ndarray
    raw: float
    clamped: float
    diagnostics: dict

    @property
    def value(self) -> float:
        return self.clamped


def coverage_total(cfg: NetworkConfig, opts: QuadratureOptions = QuadratureOptions(),
                   error_estimate: bool = True) -> CoverageResult:
    """Sum of the conditional coverages over tiers and link states."""
    support = serving_support(cfg, opts.density_floor)
    classes = interferer_classes(cfg)
    n = len(cfg.tiers)
    parts = {(w, z): _integrate_conditional(cfg, w, z, opts, support, classes)
             for w, z in product(range(n), (LOS, NLOS))}
    los_v = np.array([parts[(w, LOS)].value for w in range(n)])
    nlos_v = np.array([parts[(w, NLOS)].value for w in range(n)])
    raw = math.fsum(p.value for p in parts.values())
    groups = {key: p.groups for key, p in parts.items()}
    magnitudes = [abs(v) for g in groups.values() for v in g.values()]
    diagnostics = {
        "groups": groups,
        "condition": (math.fsum(magnitudes) / raw) if raw > 0 else math.inf,
        "domain_error": [key for key, p in parts.items() if p.domain_error],
        "support": support,
        "quad_error": None,
    }
    if error_estimate:
        coarse = QuadratureOptions(max(opts.outer_panels // 2, 1), opts.outer_order,
                                   max(opts.inner_panels // 2, 1), opts.inner_order,
                                   opts.inner_decades, opts.density_floor)
        raw_coarse = math.fsum(_integrate_conditional(cfg, w, z, coarse, support, classes).value
                               for w, z in product(range(n), (LOS, NLOS)))
        diagnostics["quad_error"] = abs(raw - raw_coarse)
    return CoverageResult(los_v, nlos_v, raw, min(1.0, max(0.0, raw)), diagnostics)


def ase_weights(cfg: NetworkConfig) -> np.ndarray:
    """K_w lambda_w log2(1 + T_w) per tier, with the outdoor density."""
    return np.array([t.users_per_bs * t.outdoor_density * math.log2(1.0 + t.target_sdinr) for t in cfg.tiers])


@dataclass
class AseResult:
    ase: float
    coverage: float
    weights: np.ndarray


def ase(cfg: NetworkConfig, opts: QuadratureOptions = QuadratureOptions(), coverage: CoverageResult | None = None) -> AseResult:
    """Area spectral efficiency in bit/s/Hz/m^2."""
    cov = coverage if coverage is not None else coverage_total(cfg, opts, error_estimate=False)
    weights = ase_weights(cfg)
    return AseResult(cov.clamped * float(weights.sum()), cov.clamped, weights)
