"""Monte Carlo drops of the full network: the empirical check on the analytic engine.

Each drop gets its own Philox stream keyed by ``(seed, drop)``, so a drop's
outcome does not depend on how many drops run or in what order. The SDINR of
a drop does not involve the target, so one batch of drops serves a whole
sweep over T.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import NetworkConfig, linear_to_db
from .coverage import ase_weights
from .geometry import BsRealization, Association, received_metric, sample_network
from .impairments import AgingDomainError
from .sdinr import sample_sdinr_distributional, sample_sdinr_matrix

MODES = ("distributional", "matrix")
_U64 = (1 << 64) - 1


def drop_rng(seed: int, drop: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed & _U64, drop], dtype=np.uint64)))


@dataclass
class DropSamples:
    """Per-drop serving link and SDINR. Empty drops have tier -1 and SDINR 0."""

    sdinr: np.ndarray
    tier: np.ndarray
    distance: np.ndarray
    los: np.ndarray
    empty: np.ndarray
    domain: np.ndarray     # |delta| below the floor: counted as not covered
    mode: str

    def __len__(self) -> int:
        return len(self.sdinr)


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    drops: int
    mode: str
    fading_scale: str
    empty_drops: int = 0
    domain_drops: int = 0

    @property
    def ci95(self) -> tuple[float, float]:
        return self.estimate - 1.96 * self.stderr, self.estimate + 1.96 * self.stderr


def _drop(cfg: NetworkConfig, rng: np.random.Generator, sampler):
    bss = sample_network(cfg, rng)
    if len(bss) == 0:
        return None
    i = kernels.associate(received_metric(cfg, bss), bss.r, bss.tier)
    t = int(bss.tier[i])
    gain = cfg.rx_beam.main_lobe_gain * cfg.tiers[t].tx_beam.main_lobe_gain
    assoc = Association(i, t, float(bss.r[i]), bool(bss.los[i]), gain)
    keep = np.arange(len(bss)) != i
    others = BsRealization(bss.tier[keep], bss.x[keep], bss.y[keep], bss.r[keep], bss.los[keep],
                           bss.path_loss[keep])
    try:
        return assoc, sampler(cfg, assoc, others, rng).sdinr
    except AgingDomainError:
        return assoc, None


def simulate_drops(cfg: NetworkConfig, drops: int, mode: str = "distributional",
                   seed: int | None = None, start: int = 0, workers: int = 1) -> DropSamples:
    """Run drops ``start .. start + drops - 1``.

    With ``workers > 1`` the drops are split into contiguous chunks run in
    separate processes; the result is identical to a serial run.
    """
    if drops < 1:
        raise ValueError("drops must be >= 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    seed = cfg.rng_seed if seed is None else int(seed)
    if workers > 1 and drops > 1:
        edges = np.linspace(0, drops, min(workers, drops) + 1).astype(int)
        jobs = [(cfg, int(b - a), mode, seed, start + int(a)) for a, b in zip(edges[:-1], edges[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, jobs))
        return DropSamples(*(np.concatenate([getattr(p, f) for p in parts])
                             for f in ("sdinr", "tier", "distance", "los", "empty", "domain")), mode)
    sampler = sample_sdinr_matrix if mode == "matrix" else sample_sdinr_distributional
    sdinr = np.zeros(drops)
    tier = np.full(drops, -1, dtype=np.int64)
    dist = np.full(drops, np.nan)
    los = np.zeros(drops, dtype=bool)
    empty = np.zeros(drops, dtype=bool)
    domain = np.zeros(drops, dtype=bool)
    for n in range(drops):
        out = _drop(cfg, drop_rng(seed, start + n), sampler)
        if out is None:
            empty[n] = True
            continue
        assoc, value = out
        tier[n], dist[n], los[n] = assoc.tier, assoc.distance, assoc.los
        if value is None:
            domain[n] = True
        else:
            sdinr[n] = value
    return DropSamples(sdinr, tier, dist, los, empty, domain, mode)


def _simulate_chunk(job) -> DropSamples:
    cfg, n, mode, seed, start = job
    return simulate_drops(cfg, n, mode, seed, start)


def covered(samples: DropSamples, cfg: NetworkConfig) -> np.ndarray:
    """Coverage indicator per drop: SDINR above the serving tier's target."""
    targets = np.array([t.target_sdinr for t in cfg.tiers] + [np.inf])
    return samples.sdinr > targets[samples.tier]


def proportion(hits: np.ndarray, samples: DropSamples, cfg: NetworkConfig) -> McEstimate:
    n = len(hits)
    p = float(np.count_nonzero(hits)) / n
    return McEstimate(p, math.sqrt(p * (1 - p) / n), n, samples.mode, cfg.fading_scale,
                      int(samples.empty.sum()), int(samples.domain.sum()))


def coverage_from_samples(samples: DropSamples, cfg: NetworkConfig) -> McEstimate:
    """Coverage at ``cfg``'s targets, reusing drops simulated under the same scenario."""
    return proportion(covered(samples, cfg), samples, cfg)


def ase_from_samples(samples: DropSamples, cfg: NetworkConfig) -> McEstimate:
    cov = coverage_from_samples(samples, cfg)
    w = float(ase_weights(cfg).sum())
    return McEstimate(cov.estimate * w, cov.stderr * w, cov.drops, cov.mode, cov.fading_scale,
                      cov.empty_drops, cov.domain_drops)


def run_coverage_mc(cfg: NetworkConfig, drops: int, mode: str = "distributional",
                    seed: int | None = None) -> McEstimate:
    return coverage_from_samples(simulate_drops(cfg, drops, mode, seed), cfg)


def run_ase_mc(cfg: NetworkConfig, drops: int, mode: str = "distributional", seed: int | None = None) -> McEstimate:
    return ase_from_samples(simulate_drops(cfg, drops, mode, seed), cfg)


def trace_csv(samples: DropSamples, cfg: NetworkConfig) -> str:
    """Per-drop trace: drop, serving tier, distance, link state, SDINR in dB, coverage."""
    hit = covered(samples, cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["drop", "serving_tier", "x", "los", "sdinr_db", "covered"])
    for n in range(len(samples)):
        s = samples.sdinr[n]
        w.writerow([n, int(samples.tier[n]), "" if samples.empty[n] else repr(float(samples.distance[n])),
                    int(samples.los[n]), repr(linear_to_db(s)) if s > 0 else "-inf", int(hit[n])])
    return buf.getvalue()
