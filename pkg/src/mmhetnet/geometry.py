"""PPP drops with LOS/NLOS blockage, cell association and the distance laws.

Two layers live here. The sampling layer draws base stations inside a square
window and picks the serving one. The analytic layer gives the laws of the
nearest LOS/NLOS base station and of the serving distance on the infinite
plane, both per tier in isolation and for the full multi-tier network.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .config import NetworkConfig, TierParams

LOS, NLOS = True, False


class EmptyNetworkError(RuntimeError):
    pass


class QuadratureError(RuntimeError):
    pass


def los_probability(r, blockage_rate: float):
    """Probability that a link of length ``r`` is unblocked, exp(-beta r)."""
    return np.exp(-blockage_rate * np.asarray(r, dtype=float))


def path_loss(tier: TierParams, r, los):
    r = np.asarray(r, dtype=float)
    los = np.asarray(los, dtype=bool)
    return np.where(los, tier.los_intercept * r ** -tier.los_exponent,
                    tier.nlos_intercept * r ** -tier.nlos_exponent)


@dataclass(frozen=True)
class BsRealization:
    """Base stations of one drop, stored column-wise.

    Each index ``i`` is one BS: its tier, planar position, distance to the
    typical user at the origin, link state and path loss.
    """

    tier: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    los: np.ndarray
    path_loss: np.ndarray

    def __len__(self) -> int:
        return len(self.r)

    @classmethod
    def concat(cls, parts: list["BsRealization"]) -> "BsRealization":
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("tier", "x", "y", "r", "los", "path_loss")))

    @classmethod
    def empty(cls) -> "BsRealization":
        z = np.zeros(0)
        return cls(np.zeros(0, dtype=np.int64), z, z, z, np.zeros(0, dtype=bool), z)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tier", "x", "y", "r", "los", "path_loss"])
        for row in zip(self.tier, self.x, self.y, self.r, self.los, self.path_loss):
            w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])), repr(float(row[3])),
                        int(row[4]), repr(float(row[5]))])
        return buf.getvalue()


def sample_tier_ppp(tier: TierParams, window: float, rng: np.random.Generator,
                    tier_index: int = 0) -> BsRealization:
    """Outdoor BSs of one tier on [-window, window]^2 with independent LOS draws."""
    mean = tier.outdoor_density * (2.0 * window) ** 2
    n = int(rng.poisson(mean))
    xy = rng.uniform(-window, window, size=(n, 2))
    r = np.hypot(xy[:, 0], xy[:, 1])
    los = rng.random(n) < los_probability(r, tier.blockage_rate)
    return BsRealization(np.full(n, tier_index, dtype=np.int64), xy[:, 0], xy[:, 1], r, los,
                         path_loss(tier, r, los))


def sample_network(cfg: NetworkConfig, rng: np.random.Generator) -> BsRealization:
    return BsRealization.concat([sample_tier_ppp(t, cfg.sim_window, rng, j)
                                 for j, t in enumerate(cfg.tiers)])


@dataclass(frozen=True)
class Association:
    index: int
    tier: int
    distance: float
    los: bool
    gain: float


def received_metric(cfg: NetworkConfig, bss: BsRealization) -> np.ndarray:
    """Average received power with aligned main lobes, M_r M_t P L(R)."""
    scale = np.array([cfg.rx_beam.main_lobe_gain * t.tx_beam.main_lobe_gain * t.per_user_power
                      for t in cfg.tiers])
    return scale[bss.tier] * bss.path_loss


def associate(bss: BsRealization, cfg: NetworkConfig) -> Association:
    """Serving BS: maximum average received power; ties go to the nearer, then the lower tier."""
    if len(bss) == 0:
        raise EmptyNetworkError("no base station in the simulation window")
    metric = received_metric(cfg, bss)
    # lexsort: last key is primary
    order = np.lexsort((bss.tier, bss.r, -metric))
    i = int(order[0])
    t = int(bss.tier[i])
    gain = cfg.rx_beam.main_lobe_gain * cfg.tiers[t].tx_beam.main_lobe_gain
    return Association(i, t, float(bss.r[i]), bool(bss.los[i]), gain)


# ---------------------------------------------------------------------------
# analytic laws, single tier in isolation

def _los_mass(beta: float, d):
    """Integral of t exp(-beta t) over [0, d]."""
    y = beta * np.asarray(d, dtype=float)
    return (-np.expm1(-y) - y * np.exp(-y)) / beta**2


def _nlos_mass(beta: float, d):
    d = np.asarray(d, dtype=float)
    return 0.5 * d * d - _los_mass(beta, d)


def radial_mass(beta: float, d, los: bool):
    """Integral of t p_z(t) over [0, d] with p_L = exp(-beta t), p_N = 1 - p_L."""
    return _los_mass(beta, d) if los else _nlos_mass(beta, d)


def b_los(tier: TierParams) -> float:
    """Probability that the typical user sees at least one LOS BS."""
    lam = tier.outdoor_density
    return float(-np.expm1(-2 * math.pi * lam / tier.blockage_rate**2))


def b_nlos(tier: TierParams) -> float:
    """Probability of at least one NLOS BS; the NLOS radial mass diverges, so this is 1."""
    # The exponent 2 pi lam * int_0^inf t (1 - e^{-beta t}) dt is infinite.
    return 1.0


def psi_los(tier: TierParams, x):
    """NLOS distance with the same path loss as a LOS link of length ``x``."""
    return (tier.nlos_intercept / tier.los_intercept) ** (1 / tier.nlos_exponent) * \
        np.asarray(x, dtype=float) ** (tier.los_exponent / tier.nlos_exponent)


def psi_nlos(tier: TierParams, x):
    """LOS distance with the same path loss as a NLOS link of length ``x``."""
    return (tier.los_intercept / tier.nlos_intercept) ** (1 / tier.los_exponent) * \
        np.asarray(x, dtype=float) ** (tier.nlos_exponent / tier.los_exponent)


def conditional_nearest_pdfs(tier: TierParams) -> tuple[Callable, Callable]:
    """PDFs of the distance to the nearest LOS and nearest NLOS BS, given one exists."""
    lam, beta = tier.outdoor_density, tier.blockage_rate
    bl, bn = b_los(tier), b_nlos(tier)

    def f_los(x):
        x = np.asarray(x, dtype=float)
        return 2 * math.pi * lam * x * los_probability(x, beta) * \
            np.exp(-2 * math.pi * lam * _los_mass(beta, x)) / bl

    def f_nlos(x):
        x = np.asarray(x, dtype=float)
        return 2 * math.pi * lam * x * (1 - los_probability(x, beta)) * \
            np.exp(-2 * math.pi * lam * _nlos_mass(beta, x)) / bn

    return f_los, f_nlos


def _quad(f, a, b, points=None) -> float:
    val, err = integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=400, points=points)
    if not np.isfinite(val) or err > 1e-9 + 1e-7 * abs(val):
        raise QuadratureError(f"quadrature did not converge (value {val}, error {err})")
    return float(val)


def _support(tier: TierParams) -> tuple[float, list[float]]:
    lam, beta = tier.outdoor_density, tier.blockage_rate
    scale = 1 / math.sqrt(math.pi * lam)
    hi = 12 * scale + 60 / beta
    return hi, sorted({min(hi, s) for s in (1 / beta, 5 / beta, scale, 3 * scale)})


def association_probabilities(tier: TierParams) -> tuple[float, float]:
    """(A_L, A_N) for a tier on its own: chance the serving BS is LOS / NLOS."""
    lam = tier.outdoor_density
    beta = tier.blockage_rate
    f_los, _ = conditional_nearest_pdfs(tier)
    hi, pts = _support(tier)
    a_los = b_los(tier) * _quad(
        lambda x: math.exp(-2 * math.pi * lam * float(_nlos_mass(beta, psi_los(tier, x)))) * float(f_los(x)),
        0.0, hi, pts)
    return a_los, 1.0 - a_los


def serving_distance_pdfs(tier: TierParams) -> tuple[Callable, Callable]:
    """PDFs of the serving distance given a LOS / NLOS serving BS (single tier)."""
    lam, beta = tier.outdoor_density, tier.blockage_rate
    f_los, f_nlos = conditional_nearest_pdfs(tier)
    a_los, a_nlos = association_probabilities(tier)
    bl, bn = b_los(tier), b_nlos(tier)

    def fh_los(x):
        return bl * f_los(x) * np.exp(-2 * math.pi * lam * _nlos_mass(beta, psi_los(tier, x))) / a_los

    def fh_nlos(x):
        return bn * f_nlos(x) * np.exp(-2 * math.pi * lam * _los_mass(beta, psi_nlos(tier, x))) / a_nlos

    return fh_los, fh_nlos


# ---------------------------------------------------------------------------
# multi-tier network laws

def exclusion_radius(cfg: NetworkConfig, w: int, los: bool, x, j: int, los_j: bool):
    """Distance below which a tier-``j`` BS of link state ``los_j`` would out-power
    a tier-``w`` server of link state ``los`` at distance ``x``."""
    tw, tj = cfg.tiers[w], cfg.tiers[j]
    serve = tw.tx_beam.main_lobe_gain * tw.per_user_power * tw.intercept(los) * \
        np.asarray(x, dtype=float) ** -tw.exponent(los)
    other = tj.tx_beam.main_lobe_gain * tj.per_user_power * tj.intercept(los_j)
    return (other / serve) ** (1 / tj.exponent(los_j))


def serving_density(cfg: NetworkConfig, w: int, los: bool, x) -> np.ndarray:
    """Joint density that the server is tier ``w``, state ``los``, at distance ``x``.

    Integrating over ``x`` and summing over (w, los) gives 1.
    """
    x = np.asarray(x, dtype=float)
    t = cfg.tiers[w]
    p = los_probability(x, t.blockage_rate)
    dens = 2 * math.pi * t.outdoor_density * x * (p if los else 1 - p)
    expo = np.zeros_like(x)
    for j, tj in enumerate(cfg.tiers):
        for los_j in (LOS, NLOS):
            d = exclusion_radius(cfg, w, los, x, j, los_j)
            expo += tj.outdoor_density * radial_mass(tj.blockage_rate, d, los_j)
    return dens * np.exp(-2 * math.pi * expo)


def serving_support(cfg: NetworkConfig, floor: float = 1e-15) -> tuple[float, float]:
    """Distance range that holds all but a negligible part of every serving density."""
    lam = sum(t.outdoor_density for t in cfg.tiers)
    lo = 1e-5 / math.sqrt(math.pi * lam)
    grid = np.geomspace(lo, 1e8, 2000)
    total = sum(serving_density(cfg, w, z, grid) for w in range(len(cfg.tiers)) for z in (LOS, NLOS))
    mass = total * grid
    keep = np.nonzero(mass > floor * mass.max())[0]
    hi = grid[min(keep[-1] + 1, len(grid) - 1)]
    return lo, float(hi)


def association_table(cfg: NetworkConfig) -> dict[tuple[int, bool], float]:
    """Probability that the server is tier ``w`` with link state ``los``, keyed ``(w, los)``."""
    lo, hi = serving_support(cfg)
    out = {}
    for w in range(len(cfg.tiers)):
        for z in (LOS, NLOS):
            edges = np.geomspace(lo, hi, 24)
            out[(w, z)] = sum(_quad(lambda x: float(serving_density(cfg, w, z, x)), a, b)
                              for a, b in zip(edges[:-1], edges[1:]))
    return out
