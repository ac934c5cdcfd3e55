"""Compiled vs pure-Python kernels.

Kernel timings call both implementations in-process. End-to-end timings run
in a subprocess per backend, switched with MMHETNET_PURE_PYTHON.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from mmhetnet import _kernels_py
from mmhetnet.laplace import interferer_classes
from mmhetnet.presets import default_config
from mmhetnet.quadrature import QuadratureOptions, unit_rule

try:
    from mmhetnet import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

END_TO_END = r"""
import json, time
from mmhetnet import kernels
from mmhetnet.coverage import coverage_total
from mmhetnet.montecarlo import simulate_drops
from mmhetnet.presets import default_config, with_target_db
cfg = with_target_db(default_config(), 6.0)
coverage_total(cfg, error_estimate=False)
out = {"backend": kernels.BACKEND}
t = time.perf_counter(); coverage_total(cfg, error_estimate=False); out["coverage point (two tiers)"] = time.perf_counter() - t
t = time.perf_counter(); simulate_drops(cfg, 2000, seed=1); out["2000 MC drops"] = time.perf_counter() - t
print(json.dumps(out))
"""


def kernel_cases():
    cfg = default_config()
    cl = interferer_classes(cfg)
    opts = QuadratureOptions()
    x = np.geomspace(1, 5000, 32 * 8)
    s = np.geomspace(1e8, 1e16, len(x))
    d = cl.exclusion(cfg, 0, False, x)
    nodes, weights = unit_rule(opts.inner_panels, opts.inner_order)
    pgfl = (s, d, cl.q, cl.pref, cl.shape, cl.alpha, cl.blockage, cl.los, nodes, weights, opts.inner_decades, 3)

    rng = np.random.default_rng(0)
    n = 400
    metric, r = rng.random(n), rng.random(n) * 2500
    tier = rng.integers(0, 2, n).astype(np.int64)
    cum = np.cumsum(np.full((2, 4), 0.25), axis=1)
    gains = np.tile([100.0, 1.0, 100.0, 1.0], (2, 1))
    interf = (tier, rng.random(n) * 1e-9, rng.random(n), rng.gamma(2, 1, n), cum, gains, np.array([1.0, 0.5]), -1)
    return {
        "pgfl_exponent_derivs (256 nodes, order 3)": ("pgfl_exponent_derivs", pgfl),
        "associate (400 BSs)": ("associate", (metric, r, tier)),
        "interference_sum (400 BSs)": ("interference_sum", interf),
    }


def best(fn, args, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def end_to_end(pure: bool) -> dict:
    env = dict(os.environ, MMHETNET_PURE_PYTHON="1" if pure else "0")
    res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; only the Python backend is available")
    rows = []
    for label, (name, call_args) in kernel_cases().items():
        py = best(getattr(_kernels_py, name), call_args, args.repeat)
        c = best(getattr(_kernels_c, name), call_args, args.repeat) if _kernels_c else float("nan")
        rows.append((label, c, py))
    c_run = end_to_end(False) if _kernels_c else {}
    py_run = end_to_end(True)
    for label in py_run:
        if label != "backend":
            rows.append((label, c_run.get(label, float("nan")), py_run[label]))
    print(f"{'case':45s} {'cython [ms]':>12s} {'python [ms]':>12s} {'speedup':>8s}")
    for label, c, py in rows:
        print(f"{label:45s} {1e3 * c:12.3f} {1e3 * py:12.3f} {py / c:8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
