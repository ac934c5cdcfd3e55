"""Coverage probability and area spectral efficiency of multi-tier mmWave MU-MIMO
networks with residual transceiver impairments and channel aging.

Two engines share one scenario type: a semi-analytic evaluator built on
Laplace transforms of the SDINR terms, and a Monte Carlo simulator of full
network drops.
"""
from .config import BeamPattern, ConfigError, NetworkConfig, TierParams, dump_config, load_config
from .coverage import AseResult, CoverageResult, ase, coverage_conditional, coverage_total
from .kernels import BACKEND
from .montecarlo import McEstimate, run_ase_mc, run_coverage_mc, simulate_drops
from .presets import default_config

__all__ = [
    "BACKEND", "AseResult", "BeamPattern", "ConfigError", "CoverageResult", "McEstimate", "NetworkConfig",
    "TierParams", "ase", "coverage_conditional", "coverage_total", "default_config", "dump_config",
    "load_config", "run_ase_mc", "run_coverage_mc", "simulate_drops",
]
__version__ = "0.1.0"
