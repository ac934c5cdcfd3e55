"""Default scenario and the figure-reproduction curve families.

Absolute curve levels depend on the macro density, which is a documented
default here rather than a measured value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import (BeamPattern, NetworkConfig, TierParams, db_to_linear, default_thermal_noise,
                     free_space_intercept)

MACRO_DENSITY = 5e-6
SECOND_TIER_RATIO = 0.5
DEFAULT_CSIT_QUALITY = 0.1
T_GRID_DB = tuple(float(t) for t in range(-10, 31, 2))
DOPPLER_GRID = tuple(round(0.005 * i, 3) for i in range(121))

BANNER = ("# note: absolute levels depend on the default macro density "
          f"lambda_B1={MACRO_DENSITY:g} /m^2 (second tier {SECOND_TIER_RATIO:g}x)")


def default_tier(density: float = MACRO_DENSITY, carrier_freq: float = 50e9, **changes) -> TierParams:
    c = free_space_intercept(carrier_freq)
    base = dict(bs_density=density, antennas=5, users_per_bs=2, tx_power=db_to_linear(5.0),
                target_sdinr=1.0, los_intercept=c, nlos_intercept=c, blockage_rate=1 / 141.4,
                los_exponent=3.0, nlos_exponent=4.0,
                tx_beam=BeamPattern(db_to_linear(20.0), 1.0, math.radians(30.0)),
                csit_quality=DEFAULT_CSIT_QUALITY)
    base.update(changes)
    return TierParams(**base)


def default_config(tiers: int = 2, **tier_changes) -> NetworkConfig:
    """Two-tier scenario (or a single tier with ``tiers=1``) with ideal hardware."""
    dens = [MACRO_DENSITY, SECOND_TIER_RATIO * MACRO_DENSITY][:tiers]
    return NetworkConfig(tuple(default_tier(d, **tier_changes) for d in dens), default_thermal_noise())


def with_target_db(cfg: NetworkConfig, t_db: float) -> NetworkConfig:
    return cfg.with_tiers(target_sdinr=db_to_linear(t_db))


def with_atn_ratio(cfg: NetworkConfig, ratio: float) -> NetworkConfig:
    return cfg.with_tiers(atn_variance=ratio * cfg.thermal_noise)


def with_tx_gain(cfg: NetworkConfig, gain: float) -> NetworkConfig:
    return cfg.with_tiers(tx_beam=BeamPattern(gain, cfg.tiers[0].tx_beam.back_lobe_gain,
                                              cfg.tiers[0].tx_beam.beamwidth))


@dataclass(frozen=True)
class Curve:
    label: str
    apply: Callable[[NetworkConfig], NetworkConfig]


@dataclass(frozen=True)
class Preset:
    name: str
    metric: str          # "coverage" or "ase"
    x_name: str          # "target_sdinr_db" or "normalized_doppler"
    x_grid: tuple
    curves: tuple
    base: Callable[[NetworkConfig], NetworkConfig] = lambda c: c
    description: str = ""

    def configure(self, cfg: NetworkConfig, curve: Curve, x: float) -> NetworkConfig:
        cfg = curve.apply(self.base(cfg))
        if self.x_name == "target_sdinr_db":
            return with_target_db(cfg, x)
        return cfg.with_aging(normalized_doppler=x)


def _hw(kappa=0.0, atn=1.0, delta=1.0, kappa_t=None, kappa_r=None):
    kt = kappa if kappa_t is None else kappa_t
    kr = kappa if kappa_r is None else kappa_r

    def apply(cfg: NetworkConfig) -> NetworkConfig:
        cfg = cfg.with_aging(delta=delta).with_tiers(tx_impairment=kt, rx_impairment=kr)
        return with_atn_ratio(cfg, atn)
    return apply


def _chain(*fs):
    def apply(cfg):
        for f in fs:
            cfg = f(cfg)
        return cfg
    return apply


KAPPAS = (0.062, 0.126, 0.258)
ATN_RATIOS = (1.0, 1.6, 3.2)
DELTAS = (1.0, 0.9, 0.7)
TX_GAINS = (100.0, 200.0, 300.0)
FIG7_ANTENNAS = (2, 4, 6, 8)
FIG8_USERS = (1, 2, 3, 4, 5)
FIG2_ANTENNAS = (4, 6, 8)
FIG2_TARGET_DB = 0.0


def _antennas(n):
    return lambda cfg: cfg.with_tiers(antennas=n)


def _users(k):
    return lambda cfg: cfg.with_tiers(users_per_bs=k)


PRESETS: dict[str, Preset] = {
    "fig1": Preset("fig1", "coverage", "target_sdinr_db", T_GRID_DB,
                   tuple(Curve(f"delta={d:g}", _hw(delta=d)) for d in DELTAS),
                   description="coverage vs T for several aging coefficients"),
    "fig2": Preset("fig2", "ase", "normalized_doppler", DOPPLER_GRID,
                   tuple(Curve(f"N={n}", _antennas(n)) for n in FIG2_ANTENNAS),
                   base=lambda c: with_target_db(_hw()(c), FIG2_TARGET_DB),
                   description="ASE vs normalized Doppler for several antenna counts"),
    "fig3": Preset("fig3", "coverage", "target_sdinr_db", T_GRID_DB,
                   (Curve("ideal", _hw()),) + tuple(Curve(f"kappa={k:g}", _hw(kappa=k)) for k in KAPPAS),
                   description="coverage vs T for several distortion levels"),
    "fig4": Preset("fig4", "ase", "target_sdinr_db", T_GRID_DB,
                   (Curve("ideal", _hw()),)
                   + tuple(Curve(f"kappa={k:g}", _hw(kappa=k)) for k in KAPPAS)
                   + (Curve("kappa_t=0.126,kappa_r=0", _hw(kappa_t=0.126, kappa_r=0.0)),
                      Curve("kappa_t=0,kappa_r=0.126", _hw(kappa_t=0.0, kappa_r=0.126))),
                   description="ASE vs T for several distortion levels, transmit vs receive"),
    "fig5": Preset("fig5", "coverage", "target_sdinr_db", T_GRID_DB,
                   tuple(Curve(f"atn={r:g}sigma2", _hw(atn=r)) for r in ATN_RATIOS),
                   description="coverage vs T for several amplified-noise levels"),
    "fig6": Preset("fig6", "ase", "target_sdinr_db", T_GRID_DB,
                   tuple(Curve(f"M_t={g:g}", lambda c, g=g: with_tx_gain(c, g)) for g in TX_GAINS),
                   base=_hw(kappa=0.126, atn=1.6, delta=0.7),
                   description="ASE vs T for several main-lobe gains"),
    "fig7": Preset("fig7", "coverage", "target_sdinr_db", T_GRID_DB,
                   tuple(Curve(f"N={n}", _antennas(n)) for n in FIG7_ANTENNAS),
                   base=_chain(_hw(kappa=0.126, atn=1.6, delta=0.9), _users(2)),
                   description="coverage vs T for several antenna counts, K=2"),
    "fig8": Preset("fig8", "coverage", "target_sdinr_db", T_GRID_DB,
                   tuple(Curve(f"K={k}", _users(k)) for k in FIG8_USERS),
                   base=_chain(_hw(kappa=0.126, atn=1.6, delta=0.9), _antennas(5)),
                   description="coverage vs T for several user counts, N=5"),
}


def preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def t_grid() -> np.ndarray:
    return np.array(T_GRID_DB)
