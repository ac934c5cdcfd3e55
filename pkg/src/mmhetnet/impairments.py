"""Channel aging, limited-feedback CSIT and additive transceiver distortion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DELTA_FLOOR, TierParams


class AgingDomainError(ArithmeticError):
    """|delta| too small for the delta^-2 scaling of the estimation-error power."""


def combined_error_variance(delta: float, tau: float) -> float:
    """Per-entry variance of the aged-plus-feedback error, 1 - delta^2 (1 - tau^2)."""
    return 1.0 - delta * delta * (1.0 - tau * tau)


@dataclass(frozen=True)
class AgedCsit:
    delta: float
    tau: float

    @property
    def error_variance(self) -> float:
        return combined_error_variance(self.delta, self.tau)

    @property
    def estimate_scale(self) -> float:
        return self.delta * np.sqrt(1.0 - self.tau**2)

    @classmethod
    def of(cls, tier: TierParams) -> "AgedCsit":
        return cls(tier.delta, tier.csit_quality)


@dataclass(frozen=True)
class DistortionParams:
    kappa_t: float
    kappa_r: float
    atn_variance: float

    @classmethod
    def of(cls, tier: TierParams) -> "DistortionParams":
        return cls(tier.tx_impairment, tier.rx_impairment, tier.atn_variance)


def error_power_scale(tier: TierParams) -> float:
    """delta^-2 (1 + kappa_t^2), the factor multiplying the error power.

    Returns 0 when the error variance is zero (nothing to scale).
    """
    if tier.error_variance == 0.0:
        return 0.0
    d = tier.delta
    if abs(d) < DELTA_FLOOR:
        raise AgingDomainError(f"|delta| = {abs(d):.3g} < {DELTA_FLOOR}")
    return (1.0 + tier.tx_impairment**2) / (d * d)


def cn(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples."""
    s = np.sqrt(variance / 2.0)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_aged_channel(prev_estimate: np.ndarray, delta: float, tau: float,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One lag of aging from the delayed estimate.

    Returns ``(channel, estimate)`` with ``estimate = delta sqrt(1 - tau^2) prev``
    and ``channel = estimate + e`` where ``e`` has per-entry variance
    ``1 - delta^2 (1 - tau^2)``.
    """
    estimate = delta * np.sqrt(1.0 - tau * tau) * np.asarray(prev_estimate)
    var = combined_error_variance(delta, tau)
    if var == 0.0:
        return estimate.copy(), estimate
    return estimate + cn(rng, estimate.shape, var), estimate


def sample_distortion_powers(tier: TierParams, channel_norm_sq, beta_z):
    """Transmit and receive distortion powers for a realized ||h||^2."""
    h2 = np.asarray(channel_norm_sq, dtype=float)
    return beta_z * tier.tx_impairment**2 * h2, beta_z * tier.rx_impairment**2 * h2
