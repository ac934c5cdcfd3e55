"""Command-line front end: presets, parameter sweeps and CSV output.

Output is a versioned CSV. Comment lines starting with ``#`` carry the schema
tag, a SHA-256 of the resolved scenario and run settings, and a note on the
density assumption. Rows come in grid order; ``runtime_ms`` is the only
column that varies between identical runs.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .config import ConfigError, NetworkConfig, config_from_dict, config_to_dict, dump_config, load_config
from .coverage import ase, coverage_total
from .geometry import EmptyNetworkError, QuadratureError
from .impairments import AgingDomainError
from .montecarlo import MODES, ase_from_samples, coverage_from_samples, simulate_drops, trace_csv
from .presets import BANNER, PRESETS, T_GRID_DB, Curve, default_config, preset

SCHEMA = "mmhetnet-curves/1"
COLUMNS = ("curve", "parameter", "value", "metric", "analytic_raw", "analytic_clamped",
           "mc_estimate", "mc_stderr", "mc_empty_drops", "bound_ok", "error", "runtime_ms")
ENGINES = ("analytic", "mc", "both")
METRICS = ("coverage", "ase")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
NUMERICAL_ERRORS = (QuadratureError, AgingDomainError, EmptyNetworkError, FloatingPointError,
                    ArithmeticError, np.linalg.LinAlgError)

_INT_KEYS = {"antennas", "users_per_bs", "rng_seed", "tx_impairment_bits", "rx_impairment_bits"}
# keys that describe the same quantity; setting one drops the others
_ALTERNATES = [
    {"atn_variance", "atn_variance_dbw", "atn_ratio", "atn_amplifier"},
    {"blockage_rate", "los_range_m"},
    {"tx_impairment", "tx_impairment_bits"},
    {"rx_impairment", "rx_impairment_bits"},
]
_AGING_CONFLICTS = {
    "delta": {"doppler_hz", "velocity_mps", "sample_period_s", "normalized_doppler"},
    "normalized_doppler": {"delta", "doppler_hz", "velocity_mps", "sample_period_s"},
    "doppler_hz": {"delta", "normalized_doppler", "velocity_mps"},
    "velocity_mps": {"delta", "normalized_doppler", "doppler_hz"},
    "sample_period_s": {"delta", "normalized_doppler"},
}


def _base_name(key: str) -> str:
    for suffix in ("_dbw", "_db"):
        if key.endswith(suffix):
            return key[: -len(suffix)]
    return key


def _set_leaf(d: dict, key: str, value: Any, in_aging: bool) -> None:
    if in_aging:
        for other in _AGING_CONFLICTS.get(key, ()):
            d.pop(other, None)
    else:
        base = _base_name(key)
        for other in list(d):
            if other != key and _base_name(other) == base:
                del d[other]
        for group in _ALTERNATES:
            if key in group:
                for other in group - {key}:
                    d.pop(other, None)
    d[key] = value


def _set_path(node: Any, parts: list[str], value: Any, full: str, in_aging: bool = False) -> None:
    head, rest = parts[0], parts[1:]
    if isinstance(node, list):
        if head == "*":
            targets = range(len(node))
        else:
            try:
                targets = [int(head)]
                node[targets[0]]
            except (ValueError, IndexError):
                raise ConfigError(full, f"no list element {head!r}") from None
        for i in targets:
            if not rest:
                raise ConfigError(full, "path ends at a list element")
            _set_path(node[i], rest, value, full)
        return
    if not isinstance(node, dict):
        raise ConfigError(full, "path does not resolve")
    if not rest:
        _set_leaf(node, head, value, in_aging)
        return
    if head not in node or not isinstance(node[head], (dict, list)):
        if head != "aging":
            raise ConfigError(full, f"no section {head!r}")
        node[head] = {}
    _set_path(node[head], rest, value, full, in_aging=(head == "aging"))


def parse_value(key: str, text: str) -> Any:
    leaf = key.rsplit(".", 1)[-1]
    if leaf == "fading_scale":
        return text
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r} as a number") from None
    if leaf in _INT_KEYS:
        if v != int(v):
            raise ConfigError(key, "must be an integer")
        return int(v)
    return v


def apply_override(cfg: NetworkConfig, key: str, value: Any) -> NetworkConfig:
    """Set a dotted key (``tiers.*.antennas``, ``rx_beam.main_lobe_gain_db``, ...) and revalidate."""
    d = copy.deepcopy(config_to_dict(cfg))
    _set_path(d, key.split("."), value, key)
    return config_from_dict(d)


@dataclass(frozen=True)
class SweepSpec:
    key: str
    values: tuple
    engine: str = "analytic"
    out: str | None = None
    metric: str = "coverage"

    def __post_init__(self):
        if not self.values:
            raise ConfigError("sweep", "value grid is empty")
        if self.engine not in ENGINES:
            raise ConfigError("engine", f"must be one of {ENGINES}")
        if self.metric not in METRICS:
            raise ConfigError("metric", f"must be one of {METRICS}")


@dataclass(frozen=True)
class CurvePoint:
    curve: str
    parameter: str
    value: float
    metric: str
    analytic_raw: float | None = None
    analytic_clamped: float | None = None
    mc_estimate: float | None = None
    mc_stderr: float | None = None
    mc_empty_drops: int | None = None
    error: str = ""
    runtime_ms: float = 0.0

    @property
    def bound_ok(self) -> bool | None:
        if self.analytic_clamped is None or self.mc_estimate is None:
            return None
        return self.analytic_clamped >= self.mc_estimate - 3 * self.mc_stderr

    def row(self) -> list[str]:
        def num(v):
            return "" if v is None else repr(float(v))
        ok = self.bound_ok
        return [self.curve, self.parameter, num(self.value), self.metric, num(self.analytic_raw),
                num(self.analytic_clamped), num(self.mc_estimate), num(self.mc_stderr),
                "" if self.mc_empty_drops is None else str(self.mc_empty_drops),
                "" if ok is None else str(int(ok)), self.error, f"{self.runtime_ms:.1f}"]


@dataclass
class RunSettings:
    engine: str = "analytic"
    drops: int = 10_000
    mode: str = "distributional"
    seed: int | None = None
    workers: int = 1
    trace: str | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def samples(self, cfg: NetworkConfig):
        # SDINR draws do not depend on the targets; key the cache on everything else
        key = dump_config(cfg.with_tiers(target_sdinr=1.0))
        if key not in self._cache:
            self._cache[key] = simulate_drops(cfg, self.drops, self.mode, self.seed, workers=self.workers)
        return self._cache[key]


def evaluate_point(cfg: NetworkConfig, metric: str, settings: RunSettings, curve: str,
                   parameter: str, value: float) -> CurvePoint:
    t0 = time.perf_counter()
    out: dict[str, Any] = {}
    errors = []
    if settings.engine in ("analytic", "both"):
        try:
            cov = coverage_total(cfg, error_estimate=False)
            if metric == "coverage":
                out["analytic_raw"], out["analytic_clamped"] = cov.raw, cov.clamped
            else:
                res = ase(cfg, coverage=cov)
                out["analytic_raw"] = cov.raw * float(res.weights.sum())
                out["analytic_clamped"] = res.ase
        except NUMERICAL_ERRORS as exc:
            errors.append(f"analytic: {type(exc).__name__}: {exc}")
    if settings.engine in ("mc", "both"):
        try:
            samples = settings.samples(cfg)
            est = coverage_from_samples(samples, cfg) if metric == "coverage" else ase_from_samples(samples, cfg)
            out.update(mc_estimate=est.estimate, mc_stderr=est.stderr, mc_empty_drops=est.empty_drops)
            if settings.trace:
                with open(f"{settings.trace}.{curve}.{value!r}.csv".replace(" ", "_"), "w",
                          encoding="utf-8", newline="\n") as fh:
                    fh.write(trace_csv(samples, cfg))
        except NUMERICAL_ERRORS as exc:
            errors.append(f"mc: {type(exc).__name__}: {exc}")
    return CurvePoint(curve, parameter, float(value), metric, error="; ".join(errors).replace("\n", " "),
                      runtime_ms=1e3 * (time.perf_counter() - t0), **out)


def config_hash(cfg: NetworkConfig, extra: dict) -> str:
    payload = json.dumps({"config": config_to_dict(cfg), "run": extra}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def render_csv(points: Sequence[CurvePoint], header: dict[str, Any], notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    for k in sorted(header):
        buf.write(f"# {k}={header[k]}\n")
    for note in notes:
        buf.write(note if note.startswith("#") else f"# {note}")
        buf.write("\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for p in points:
        w.writerow(p.row())
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse an emitted file back into (header fields, rows); checks the schema tag and columns."""
    lines = text.split("\n")
    header = {}
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        k, sep, v = line[1:].strip().partition("=")
        if sep and " " not in k:
            header[k] = v
    if header.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {header.get('schema')!r}")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[body_start:]))))
    if rows and tuple(rows[0].keys()) != COLUMNS:
        raise ValueError("unexpected columns")
    return header, rows


def _run_header(cfg, settings: RunSettings, metric: str, what: dict) -> dict:
    run = {"engine": settings.engine, "metric": metric, "drops": settings.drops, "mode": settings.mode,
           "seed": cfg.rng_seed if settings.seed is None else settings.seed, **what}
    return {"config_sha256": config_hash(cfg, run), **{k: v for k, v in run.items()}}


def run_sweep(spec: SweepSpec, cfg: NetworkConfig, settings: RunSettings | None = None) -> str:
    """One row per grid value of ``spec.key``; writes ``spec.out`` when given and returns the CSV."""
    settings = settings or RunSettings(engine=spec.engine)
    settings.engine = spec.engine
    configs = [apply_override(cfg, spec.key, v) for v in spec.values]
    points = [evaluate_point(c, spec.metric, settings, "sweep", spec.key, v)
              for c, v in zip(configs, spec.values)]
    text = render_csv(points, _run_header(cfg, settings, spec.metric, {"sweep": spec.key}))
    _emit(text, spec.out)
    return text


def run_preset(name: str, overrides: dict[str, Any] | None = None, cfg: NetworkConfig | None = None,
               settings: RunSettings | None = None, out: str | None = None) -> str:
    """Curve family of a figure preset over its default grid."""
    p = preset(name)
    settings = settings or RunSettings()
    base = cfg if cfg is not None else default_config()
    for k, v in (overrides or {}).items():
        base = apply_override(base, k, v)
    points = []
    for curve in p.curves:
        for x in p.x_grid:
            points.append(evaluate_point(p.configure(base, curve, x), p.metric, settings, curve.label, p.x_name, x))
    text = render_csv(points, _run_header(base, settings, p.metric, {"preset": name}), [BANNER])
    _emit(text, out)
    return text


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _has_errors(text: str) -> bool:
    return any(r["error"] for r in read_csv(text)[1])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmhetnet", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON scenario file (default: built-in two-tier scenario)")
    ap.add_argument("--preset", choices=sorted(PRESETS))
    ap.add_argument("--sweep", metavar="KEY=V1,V2,...", help="dotted config key and value grid")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override before running")
    ap.add_argument("--metric", choices=METRICS, default="coverage", help="metric for --sweep")
    ap.add_argument("--engine", choices=ENGINES, default="analytic")
    ap.add_argument("--drops", type=int, default=10_000)
    ap.add_argument("--mode", choices=MODES, default="distributional")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, default=1, help="processes for Monte Carlo drops")
    ap.add_argument("--fading-scale", choices=("unit-scale", "unit-mean"))
    ap.add_argument("--trace", metavar="PREFIX", help="write per-drop trace CSVs with this path prefix")
    ap.add_argument("--out", help="output CSV path (default: stdout)")
    return ap


def _split_kv(text: str, flag: str) -> tuple[str, str]:
    key, sep, val = text.partition("=")
    if not sep or not key:
        raise ConfigError(flag, f"expected KEY=VALUE, got {text!r}")
    return key.strip(), val.strip()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.drops < 1:
            raise ConfigError("drops", "must be >= 1")
        if args.preset and args.sweep:
            raise ConfigError("--sweep", "cannot be combined with --preset")
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = load_config(fh.read())
        else:
            cfg = default_config()
        if args.fading_scale:
            cfg = replace(cfg, fading_scale=args.fading_scale)
        if args.seed is not None:
            cfg = replace(cfg, rng_seed=args.seed)
        overrides = {}
        for item in args.set:
            k, v = _split_kv(item, "--set")
            overrides[k] = parse_value(k, v)
        settings = RunSettings(args.engine, args.drops, args.mode, args.seed, args.workers, args.trace)
        if args.preset:
            print(BANNER.lstrip("# "), file=sys.stderr)
            text = run_preset(args.preset, overrides, cfg, settings, args.out)
        else:
            for k, v in overrides.items():
                cfg = apply_override(cfg, k, v)
            if args.sweep:
                key, raw = _split_kv(args.sweep, "--sweep")
                values = tuple(parse_value(key, v) for v in raw.split(",") if v.strip())
            else:
                key, values = "tiers.*.target_sdinr_db", T_GRID_DB
            text = run_sweep(SweepSpec(key, values, args.engine, args.out, args.metric), cfg, settings)
    except (ConfigError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if not args.out:
        sys.stdout.write(text)
    if _has_errors(text):
        print("numerical failure on at least one row; see the error column", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
