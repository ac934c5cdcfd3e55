import math

import pytest

from conftest import PRESET_SECONDS, preset_text
from mmhetnet.cli import (COLUMNS, SCHEMA, CurvePoint, RunSettings, SweepSpec, apply_override, main,
                          parse_value, read_csv, run_preset, run_sweep)
from mmhetnet.config import ConfigError
from mmhetnet.presets import (BANNER, KAPPAS, PRESETS, T_GRID_DB, default_config, preset)


def _data(text):
    return [[r[c] for c in COLUMNS if c != "runtime_ms"] for r in read_csv(text)[1]]


def test_schema_round_trip(single_tier):
    spec = SweepSpec("tiers.*.target_sdinr_db", (0.0, 10.0), engine="both")
    header, rows = read_csv(run_sweep(spec, single_tier, RunSettings(drops=200, seed=1)))
    assert header["schema"] == SCHEMA and len(header["config_sha256"]) == 64
    assert [float(r["value"]) for r in rows] == [0.0, 10.0]
    for r in rows:
        assert 0.0 <= float(r["mc_estimate"]) <= 1.0
        assert float(r["analytic_clamped"]) <= 1.0
        assert r["bound_ok"] in ("0", "1") and r["error"] == ""


def test_read_csv_rejects_other_schema():
    with pytest.raises(ValueError):
        read_csv("# schema=other/9\ncurve\n")


def test_sweep_rows_in_grid_order(single_tier):
    vals = (20.0, -10.0, 5.0)
    rows = read_csv(run_sweep(SweepSpec("tiers.0.target_sdinr_db", vals), single_tier))[1]
    assert tuple(float(r["value"]) for r in rows) == vals
    cov = [float(r["analytic_clamped"]) for r in rows]
    assert cov[1] >= cov[2] >= cov[0]


def test_empty_grid_is_validation_error():
    with pytest.raises(ConfigError):
        SweepSpec("tiers.*.antennas", ())
    with pytest.raises(ConfigError):
        SweepSpec("tiers.*.antennas", (4,), engine="exact")


def test_bound_flag():
    p = CurvePoint("c", "t", 0.0, "coverage", 0.5, 0.5, 0.6, 0.02)
    assert p.bound_ok is False
    assert CurvePoint("c", "t", 0.0, "coverage", 0.5, 0.5, 0.55, 0.02).bound_ok is True
    assert CurvePoint("c", "t", 0.0, "coverage", 0.5, 0.5).bound_ok is None
    assert len(p.row()) == len(COLUMNS)


def test_overrides(two_tier):
    cfg = apply_override(two_tier, "tiers.*.antennas", 8)
    assert all(t.antennas == 8 for t in cfg.tiers)
    cfg = apply_override(two_tier, "tiers.1.users_per_bs", 1)
    assert [t.users_per_bs for t in cfg.tiers] == [2, 1]
    cfg = apply_override(two_tier, "tiers.*.target_sdinr_db", 10.0)
    assert cfg.tiers[0].target_sdinr == pytest.approx(10.0)
    cfg = apply_override(two_tier, "tiers.*.aging.delta", 0.8)
    assert [t.delta for t in cfg.tiers] == [0.8, 0.8]
    cfg = apply_override(cfg, "tiers.*.aging.normalized_doppler", 0.0)
    assert [t.delta for t in cfg.tiers] == [1.0, 1.0]
    for bad in ("tiers.5.antennas", "nosuch.key", "tiers.*.antennas.deeper", "aging.delta"):
        with pytest.raises(ConfigError):
            apply_override(two_tier, bad, 4)
    with pytest.raises(ConfigError):
        apply_override(two_tier, "tiers.*.antennas", 1)   # fewer antennas than users
    with pytest.raises(ConfigError):
        parse_value("tiers.*.antennas", "4.5")


def test_preset_grids():
    base = default_config()
    fig3 = preset("fig3")
    assert [c.label for c in fig3.curves[1:]] == [f"kappa={k:g}" for k in KAPPAS]
    assert KAPPAS == (0.062, 0.126, 0.258)
    for c, k in zip(fig3.curves[1:], KAPPAS):
        t = fig3.configure(base, c, 0.0).tiers[0]
        assert (t.tx_impairment, t.rx_impairment) == (k, k)
    fig6 = preset("fig6")
    for c in fig6.curves:
        cfg = fig6.configure(base, c, 0.0)
        assert all(t.delta == pytest.approx(0.7) for t in cfg.tiers)
        assert cfg.tiers[0].atn_variance == pytest.approx(1.6 * cfg.thermal_noise)
    for name in ("fig7", "fig8"):
        p = preset(name)
        for c in p.curves:
            cfg = p.configure(base, c, 0.0)
            t = cfg.tiers[0]
            assert (t.tx_impairment, t.rx_impairment) == (0.126, 0.126)
            assert t.atn_variance == pytest.approx(1.6 * cfg.thermal_noise)
            assert all(t.delta == pytest.approx(0.9) for t in cfg.tiers)
    assert all(preset("fig7").configure(base, c, 0).tiers[0].users_per_bs == 2 for c in preset("fig7").curves)
    ks = [preset("fig8").configure(base, c, 0).tiers[0].users_per_bs for c in preset("fig8").curves]
    assert ks == [1, 2, 3, 4, 5] and preset("fig8").configure(base, preset("fig8").curves[0], 0).tiers[0].antennas == 5
    fig2 = preset("fig2")
    assert fig2.x_grid[0] == 0.0 and min(abs(x - 0.3827) for x in fig2.x_grid) < 0.005
    assert T_GRID_DB[0] == -10.0 and T_GRID_DB[-1] == 30.0 and len(T_GRID_DB) == 21
    with pytest.raises(KeyError):
        preset("fig9")


def test_preset_overrides_and_banner():
    text = run_preset("fig5", {"tiers.*.antennas": 6}, cfg=default_config(1), settings=RunSettings(engine="mc", drops=20))
    assert BANNER in text.splitlines()
    header, rows = read_csv(text)
    assert header["preset"] == "fig5" and len(rows) == 3 * len(T_GRID_DB)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_runs(name):
    # reduced drops; the analytic engine runs the full grid
    text = preset_text(name)
    assert PRESET_SECONDS[name] < 600
    header, rows = read_csv(text)
    p = PRESETS[name]
    assert len(rows) == len(p.curves) * len(p.x_grid)
    assert all(r["error"] == "" and r["metric"] == p.metric for r in rows)
    if p.metric == "coverage":
        assert all(0 <= float(r["mc_estimate"]) <= 1 for r in rows)


def test_main_writes_file_and_is_deterministic(tmp_path):
    outs = []
    for n in range(2):
        out = tmp_path / f"run{n}.csv"
        rc = main(["--sweep", "tiers.*.target_sdinr_db=0,10", "--engine", "both", "--drops", "300",
                   "--seed", "5", "--set", "tiers.*.antennas=4", "--out", str(out)])
        assert rc == 0
        raw = out.read_bytes()
        assert b"\r" not in raw
        outs.append(raw.decode("utf-8"))
    assert _data(outs[0]) == _data(outs[1])
    assert read_csv(outs[0])[0]["seed"] == "5"


def test_main_stdout(capsys):
    assert main(["--sweep", "tiers.*.target_sdinr_db=5", "--metric", "ase"]) == 0
    rows = read_csv(capsys.readouterr().out)[1]
    assert rows[0]["metric"] == "ase" and float(rows[0]["analytic_clamped"]) > 0


def test_exit_codes(tmp_path, capsys):
    assert main(["--sweep", "tiers.*.nope=1"]) == 2
    assert main(["--sweep", "tiers.*.antennas="]) == 2
    assert main(["--set", "tiers.*.antennas=abc"]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 2
    assert main(["--preset", "fig1", "--sweep", "x=1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["--preset", "fig42"])
    assert exc.value.code == 2
    # aging coefficient below the floor: rows are computed, the failure is flagged per row
    out = tmp_path / "num.csv"
    rc = main(["--sweep", "tiers.*.target_sdinr_db=0", "--set", "tiers.*.aging.delta=1e-9", "--engine", "both",
               "--drops", "20", "--out", str(out)])
    rows = read_csv(out.read_text())[1]
    assert rc == (3 if any(r["error"] for r in rows) else 0)
    assert float(rows[0]["analytic_clamped"]) == 0.0 and float(rows[0]["mc_estimate"]) == 0.0


def test_config_file(tmp_path):
    from mmhetnet.config import dump_config
    path = tmp_path / "cfg.json"
    path.write_text(dump_config(default_config(1, antennas=3)))
    out = tmp_path / "o.csv"
    assert main(["--config", str(path), "--sweep", "tiers.0.users_per_bs=1,3", "--out", str(out)]) == 0
    rows = read_csv(out.read_text())[1]
    assert math.isfinite(float(rows[1]["analytic_clamped"]))


def test_numerical_failure_recorded_per_row(monkeypatch, tmp_path):
    import mmhetnet.cli as cli
    from mmhetnet.geometry import QuadratureError
    real = cli.coverage_total

    def flaky(cfg, *a, **k):
        if cfg.tiers[0].target_sdinr > 5:
            raise QuadratureError("did not converge")
        return real(cfg, *a, **k)

    monkeypatch.setattr(cli, "coverage_total", flaky)
    out = tmp_path / "f.csv"
    assert main(["--sweep", "tiers.*.target_sdinr_db=0,10,-5", "--out", str(out)]) == 3
    rows = read_csv(out.read_text())[1]
    assert [bool(r["error"]) for r in rows] == [False, True, False]
    assert "QuadratureError" in rows[1]["error"] and rows[1]["analytic_clamped"] == ""
