"""Kinetic wealth-exchange simulations with periodic redistribution."""
__version__ = "0.1.0"

from .engine import EnsembleResult, RunConfig, Trajectory, run, run_ensemble, step
from .exchange import ExchangeParams, Model, apply_j, apply_l, apply_r
from .metrics import Binning, Histogram, gini, histogram, tail_slope, top_share
from .population import Population, RngStream, init_uniform, select_pair, total_wealth
from .redistribution import RedistributionParams, Scheme, apply_q, apply_t, quantile_stats

__all__ = [
    "Binning", "EnsembleResult", "ExchangeParams", "Histogram", "Model", "Population",
    "RedistributionParams", "RngStream", "RunConfig", "Scheme", "Trajectory",
    "apply_j", "apply_l", "apply_q", "apply_r", "apply_t", "gini", "histogram",
    "init_uniform", "quantile_stats", "run", "run_ensemble", "select_pair", "step",
    "tail_slope", "top_share", "total_wealth",
]
