import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest

from mmhetnet.config import NetworkConfig
from mmhetnet.coverage import ase_weights
from mmhetnet.montecarlo import (ase_from_samples, coverage_from_samples, run_ase_mc, run_coverage_mc,
                                 simulate_drops, trace_csv)
from mmhetnet.presets import default_config, default_tier, with_target_db


def _same(a, b):
    for f in ("sdinr", "tier", "los", "empty", "domain"):
        assert np.array_equal(getattr(a, f), getattr(b, f)), f
    assert np.array_equal(a.distance, b.distance, equal_nan=True)


def test_seed_determinism(two_tier):
    _same(simulate_drops(two_tier, 200, seed=9), simulate_drops(two_tier, 200, seed=9))
    assert run_coverage_mc(two_tier, 200, seed=9) == run_coverage_mc(two_tier, 200, seed=9)
    assert not np.array_equal(simulate_drops(two_tier, 50, seed=1).sdinr, simulate_drops(two_tier, 50, seed=2).sdinr)


def test_drop_streams_are_independent_of_chunking(two_tier):
    full = simulate_drops(two_tier, 120, seed=4)
    a = simulate_drops(two_tier, 70, seed=4)
    b = simulate_drops(two_tier, 50, seed=4, start=70)
    assert np.array_equal(full.sdinr, np.concatenate([a.sdinr, b.sdinr]))
    _same(full, simulate_drops(two_tier, 120, seed=4, workers=3))


def test_matrix_mode_deterministic(single_tier):
    _same(simulate_drops(single_tier, 50, "matrix", seed=2), simulate_drops(single_tier, 50, "matrix", seed=2))


def test_low_target_dense_network_always_covered():
    cfg = with_target_db(NetworkConfig((default_tier(1e-4, csit_quality=0.0),), 4e-13, sim_window=500.0), -40.0)
    est = run_coverage_mc(cfg, 2000, seed=0)
    assert est.estimate > 0.995


def test_empty_drops_not_covered():
    cfg = NetworkConfig((default_tier(1e-12),), 4e-13, sim_window=10.0)
    est = run_coverage_mc(cfg, 100)
    assert est.empty_drops == 100 and est.estimate == 0.0 and est.stderr == 0.0


def test_aging_domain_drops_not_covered():
    cfg = default_config(1, aging_delta=1e-8)
    est = run_coverage_mc(with_target_db(cfg, -30), 200)
    assert est.estimate == 0.0
    assert est.domain_drops == 200 - est.empty_drops


def test_stderr_formula(single_tier):
    est = run_coverage_mc(single_tier, 500, seed=3)
    assert est.stderr == pytest.approx(math.sqrt(est.estimate * (1 - est.estimate) / 500), rel=1e-15)
    assert 0 <= est.estimate <= 1
    lo, hi = est.ci95
    assert lo < est.estimate < hi


def test_ase_uses_shared_weights(two_tier):
    s = simulate_drops(two_tier, 300, seed=5)
    cov = coverage_from_samples(s, two_tier)
    a = ase_from_samples(s, two_tier)
    assert a.estimate == pytest.approx(cov.estimate * ase_weights(two_tier).sum(), rel=1e-12)
    assert run_ase_mc(two_tier, 300, seed=5) == a


def test_threshold_sweep_reuses_drops(single_tier):
    s = simulate_drops(single_tier, 400, seed=6)
    for t in (-5.0, 5.0, 15.0):
        cfg = with_target_db(single_tier, t)
        assert coverage_from_samples(s, cfg) == run_coverage_mc(cfg, 400, seed=6)


def test_trace_csv(single_tier):
    s = simulate_drops(single_tier, 20, seed=7)
    rows = list(csv.DictReader(io.StringIO(trace_csv(s, single_tier))))
    assert list(rows[0]) == ["drop", "serving_tier", "x", "los", "sdinr_db", "covered"]
    assert len(rows) == 20
    hits = sum(int(r["covered"]) for r in rows)
    assert hits / 20 == coverage_from_samples(s, single_tier).estimate


def test_matrix_and_distributional_coverage_agree(single_tier):
    cfg = with_target_db(single_tier, 10.0)
    a = run_coverage_mc(cfg, 10_000, "distributional", seed=8)
    b = run_coverage_mc(cfg, 10_000, "matrix", seed=8)
    joint = 1.96 * math.hypot(a.stderr, b.stderr)
    assert abs(a.estimate - b.estimate) < 2 * joint


def test_border_effect_small(single_tier):
    small = simulate_drops(single_tier, 10_000, seed=10)
    big = simulate_drops(replace(single_tier, sim_window=2 * single_tier.sim_window), 10_000, seed=10)
    for t in (0.0, 10.0, 20.0):
        cfg = with_target_db(single_tier, t)
        a, b = coverage_from_samples(small, cfg), coverage_from_samples(big, cfg)
        assert abs(a.estimate - b.estimate) < 1.96 * math.hypot(a.stderr, b.stderr)


def test_invalid_arguments(single_tier):
    with pytest.raises(ValueError):
        simulate_drops(single_tier, 0)
    with pytest.raises(ValueError):
        simulate_drops(single_tier, 5, mode="exact")
