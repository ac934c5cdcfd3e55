import functools
import time

import numpy as np
import pytest

from mmhetnet.cli import RunSettings, read_csv, run_preset
from mmhetnet.presets import default_config

ACCEPTANCE_LINES: list[str] = []
PRESET_SECONDS: dict[str, float] = {}


def record(n: int, ok: bool, detail: str) -> str:
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


@functools.lru_cache(maxsize=None)
def preset_text(name: str) -> str:
    """Each preset runs once per session: full analytic grid, a few MC drops."""
    t0 = time.perf_counter()
    text = run_preset(name, settings=RunSettings(engine="both", drops=30, seed=2))
    PRESET_SECONDS[name] = time.perf_counter() - t0
    return text


def preset_curves(name: str) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """label -> (x grid, clamped analytic values), in curve order."""
    out: dict[str, tuple[list, list]] = {}
    for r in read_csv(preset_text(name))[1]:
        xs, ys = out.setdefault(r["curve"], ([], []))
        xs.append(float(r["value"]))
        ys.append(float(r["analytic_clamped"]))
    return {k: (np.array(x), np.array(y)) for k, (x, y) in out.items()}


@pytest.fixture(scope="session")
def single_tier():
    return default_config(1)


@pytest.fixture(scope="session")
def two_tier():
    return default_config()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(ACCEPTANCE_LINES), key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
