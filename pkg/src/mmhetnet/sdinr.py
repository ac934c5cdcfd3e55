"""SDINR of the typical user: directivity PMF and the per-term power draws.

Two samplers produce the same decomposition. ``sample_sdinr_distributional``
draws each term from its closed-form law; ``sample_sdinr_matrix`` builds the
channels and zero-forcing precoders explicitly and reads the terms off them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import BeamPattern, NetworkConfig
from .geometry import Association, BsRealization
from .impairments import cn, error_power_scale, sample_aged_channel, sample_distortion_powers


@dataclass(frozen=True)
class DirectivityPmf:
    """Interfering-link gain: value ``gains[k]`` with probability ``probs[k]``."""

    gains: np.ndarray
    probs: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c


def directivity_pmf(tx: BeamPattern, rx: BeamPattern) -> DirectivityPmf:
    ct, cr = tx.main_lobe_fraction, rx.main_lobe_fraction
    gains = np.array([rx.main_lobe_gain * tx.main_lobe_gain, rx.main_lobe_gain * tx.back_lobe_gain,
                      rx.back_lobe_gain * tx.main_lobe_gain, rx.back_lobe_gain * tx.back_lobe_gain])
    probs = np.array([cr * ct, cr * (1 - ct), (1 - cr) * ct, (1 - cr) * (1 - ct)])
    return DirectivityPmf(gains, probs)


@dataclass(frozen=True)
class SdinrTerms:
    beta: float
    desired: float
    error: float
    tx_distortion: float
    rx_distortion: float
    interference: float
    atn: float

    @property
    def denominator(self) -> float:
        return self.error + self.tx_distortion + self.rx_distortion + self.interference + self.atn

    @property
    def sdinr(self) -> float:
        den = self.denominator
        if den == np.inf:
            return 0.0
        return self.beta * self.desired / den


def serving_beta(cfg: NetworkConfig, assoc: Association) -> float:
    """Mean-free serving-link power scale M_r M_t P C x^-alpha."""
    t = cfg.tiers[assoc.tier]
    return assoc.gain * t.per_user_power * t.intercept(assoc.los) * assoc.distance ** -t.exponent(assoc.los)


def tier_gain_tables(cfg: NetworkConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-tier gain values and cumulative probabilities, shape (W, 4)."""
    pmfs = [directivity_pmf(t.tx_beam, cfg.rx_beam) for t in cfg.tiers]
    return np.array([p.gains for p in pmfs]), np.array([p.cumulative for p in pmfs])


def draw_gain_classes(cum: np.ndarray, tiers: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(len(tiers))
    # vectorized searchsorted against each row of the per-tier CDF
    return np.minimum((u[:, None] >= cum[tiers]).sum(axis=1), 3)


def draw_interferer_fading(cfg: NetworkConfig, tiers: np.ndarray, rng: np.random.Generator,
                           matrix: bool = False) -> np.ndarray:
    users = np.array([t.users_per_bs for t in cfg.tiers])[tiers]
    scale = np.array([cfg.interferer_scale(t.users_per_bs) for t in cfg.tiers])[tiers]
    if not matrix:
        return rng.gamma(users, scale)
    out = np.empty(len(tiers))
    for j, t in enumerate(cfg.tiers):
        sel = np.nonzero(tiers == j)[0]
        if len(sel) == 0:
            continue
        g = cn(rng, (len(sel), t.antennas))
        v = random_orthonormal(rng, len(sel), t.antennas, t.users_per_bs)
        proj = np.einsum("bn,bnk->bk", g.conj(), v)
        out[sel] = (np.abs(proj) ** 2).sum(axis=1) * cfg.interferer_scale(t.users_per_bs)
    return out


def random_orthonormal(rng: np.random.Generator, batch: int, n: int, k: int) -> np.ndarray:
    """Isotropically drawn ``n x k`` matrices with orthonormal columns."""
    q, r = np.linalg.qr(cn(rng, (batch, n, k)))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def interference_power(cfg: NetworkConfig, interferers: BsRealization, rng: np.random.Generator,
                       matrix: bool = False) -> float:
    if len(interferers) == 0:
        return 0.0
    gains, cum = tier_gain_tables(cfg)
    u = rng.random(len(interferers))
    g = draw_interferer_fading(cfg, interferers.tier, rng, matrix)
    power = np.array([t.per_user_power for t in cfg.tiers])
    return kernels.interference_sum(interferers.tier, interferers.path_loss, u, g, cum, gains, power, -1)


def sample_desired_power(rng: np.random.Generator, antennas: int, users: int, variance: float) -> float:
    """|h^H v|^2 as Beta(N-K+1, K-1) times Gamma(N, variance)."""
    b = 1.0 if users == 1 else rng.beta(antennas - users + 1, users - 1)
    return b * rng.gamma(antennas, variance)


def sample_sdinr_distributional(cfg: NetworkConfig, assoc: Association, interferers: BsRealization,
                                rng: np.random.Generator) -> SdinrTerms:
    t = cfg.tiers[assoc.tier]
    beta = serving_beta(cfg, assoc)
    scale = error_power_scale(t)
    z = sample_desired_power(rng, t.antennas, t.users_per_bs, cfg.estimated_channel_variance)
    err = beta * scale * rng.gamma(t.users_per_bs, t.error_variance) if scale else 0.0
    h2 = rng.gamma(t.antennas, 1.0)
    dt, dr = sample_distortion_powers(t, h2, beta)
    i = interference_power(cfg, interferers, rng)
    return SdinrTerms(beta, z, float(err), float(dt), float(dr), i, t.atn_variance)


def zf_precoder(estimates: np.ndarray) -> np.ndarray:
    """Zero-forcing directions from column-normalized estimates, unit-norm columns.

    ``estimates`` is ``N x K`` with one user per column.
    """
    hbar = estimates / np.linalg.norm(estimates, axis=0, keepdims=True)
    v = hbar @ np.linalg.inv(hbar.conj().T @ hbar)
    return v / np.linalg.norm(v, axis=0, keepdims=True)


def sample_sdinr_matrix(cfg: NetworkConfig, assoc: Association, interferers: BsRealization,
                        rng: np.random.Generator, max_tries: int = 8) -> SdinrTerms:
    t = cfg.tiers[assoc.tier]
    n, k = t.antennas, t.users_per_bs
    beta = serving_beta(cfg, assoc)
    scale = error_power_scale(t)
    for _ in range(max_tries):
        prev = cn(rng, (n, k), cfg.estimated_channel_variance)
        try:
            v = zf_precoder(prev)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(v)):
            break
    else:
        raise np.linalg.LinAlgError("singular normalized channel matrix")
    z = float(np.abs(np.vdot(prev[:, 0], v[:, 0])) ** 2)
    channel, _ = sample_aged_channel(prev[:, 0], t.delta, t.csit_quality, rng)
    err_vec = channel - t.delta * np.sqrt(1 - t.csit_quality**2) * prev[:, 0]
    err = beta * scale * float(np.sum(np.abs(err_vec.conj() @ v) ** 2)) if scale else 0.0
    h2 = float(np.sum(np.abs(channel) ** 2))
    dt, dr = sample_distortion_powers(t, h2, beta)
    i = interference_power(cfg, interferers, rng, matrix=True)
    return SdinrTerms(beta, z, err, float(dt), float(dr), i, t.atn_variance)
