"""Inequality and distribution measurements on a wealth vector."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .flags import Flag


class GiniRangeWarning(UserWarning):
    """Gini computed on a vector with negative wealth; the value may leave [0, 1)."""


def _gini_sorted(r: np.ndarray) -> float:
    n = r.shape[0]
    total = np.sum(r)
    if total == 0.0:
        raise ZeroDivisionError("Gini index undefined for zero total wealth")
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * np.dot(ranks, r) / (n * total) - (n + 1) / n)


def gini(wealth) -> float:
    """Gini index from the rank-weighted sum of the ascending wealth vector.

    Negative entries are kept as they are; a :class:`GiniRangeWarning` is
    issued because the result is then not bounded by (N-1)/N.

    >>> gini([1, 2, 3, 4])
    0.25
    """
    w = np.asarray(wealth, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] < 1:
        raise ValueError("gini needs a non-empty 1-D vector")
    if np.sum(w) == 0.0:
        raise ValueError("Gini index undefined for zero total wealth")
    if np.any(w < 0.0):
        warnings.warn("negative wealth present; Gini may exceed (N-1)/N", GiniRangeWarning, stacklevel=2)
    return _gini_sorted(np.sort(w))


def gini_flagged(wealth: np.ndarray) -> tuple[float, set[Flag]]:
    """Warning-free variant for the engine: conditions come back as flags."""
    flags: set[Flag] = set()
    w = np.asarray(wealth, dtype=np.float64)
    if np.any(w < 0.0):
        flags.add(Flag.GINI_NEGATIVE_WEALTH)
    if np.sum(w) == 0.0:
        flags.add(Flag.GINI_ZERO_TOTAL)
        return math.nan, flags
    return _gini_sorted(np.sort(w)), flags


def top_share(wealth, fraction: float = 0.01) -> float:
    """Share of total wealth held by the richest ``fraction`` of agents."""
    w = np.sort(np.asarray(wealth, dtype=np.float64))
    k = max(1, int(math.ceil(fraction * w.shape[0])))
    return float(np.sum(w[-k:]) / np.sum(w))


@dataclass(frozen=True)
class MetricsSnapshot:
    t: int
    gini: float
    total: float
    max: float
    min: float
    neg_fraction: float
    flags: frozenset[Flag] = field(default_factory=frozenset)


def snapshot(wealth: np.ndarray, t: int, flags=()) -> MetricsSnapshot:
    g, gflags = gini_flagged(wealth)
    return MetricsSnapshot(
        t=int(t),
        gini=g,
        total=float(np.sum(wealth)),
        max=float(np.max(wealth)),
        min=float(np.min(wealth)),
        neg_fraction=float(np.count_nonzero(wealth < 0.0)) / wealth.shape[0],
        flags=frozenset(gflags) | frozenset(flags),
    )


class Binning(str, enum.Enum):
    LINEAR = "linear"
    LOG = "logarithmic"


@dataclass(frozen=True)
class Histogram:
    binning: Binning
    edges: np.ndarray
    counts: np.ndarray
    # samples <= 0 left out of logarithmic bins
    underflow: int = 0

    @property
    def centers(self) -> np.ndarray:
        if self.binning is Binning.LOG:
            return np.sqrt(self.edges[:-1] * self.edges[1:])
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.counts / np.diff(self.edges)


def histogram(wealth, binning: Binning | str = Binning.LINEAR, n_bins: int = 50) -> Histogram:
    """Bin a wealth vector.

    Bins are right-open except the last, which also holds the maximum.
    Linear bins span [min, max]; logarithmic bins span [min positive, max]
    and count non-positive samples as underflow.
    """
    binning = Binning(binning)
    w = np.asarray(wealth, dtype=np.float64)
    if w.size == 0:
        raise ValueError("histogram of an empty vector")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if binning is Binning.LINEAR:
        counts, edges = np.histogram(w, bins=n_bins)
        return Histogram(binning, edges, counts.astype(np.int64), 0)

    positive = w[w > 0.0]
    if positive.size == 0:
        raise ValueError("logarithmic binning needs at least one positive sample")
    lo, hi = float(positive.min()), float(positive.max())
    if lo == hi:
        lo, hi = lo / math.sqrt(10.0), hi * math.sqrt(10.0)
    edges = 10.0 ** np.linspace(math.log10(lo), math.log10(hi), n_bins + 1)
    edges[0], edges[-1] = lo, hi
    counts, _ = np.histogram(positive, bins=edges)
    return Histogram(binning, edges, counts.astype(np.int64), int(w.size - positive.size))


@dataclass(frozen=True)
class TailFit:
    slope: float
    stderr: float
    n_bins: int


def tail_slope(hist: Histogram, min_bins: int = 3) -> TailFit | None:
    """Least-squares slope of log density against log bin center above the mode.

    Only non-empty bins to the right of the modal bin enter the fit. Returns
    ``None`` when fewer than ``min_bins`` such bins exist.
    """
    if hist.binning is not Binning.LOG:
        raise ValueError("tail_slope needs a logarithmic histogram")
    mode = int(np.argmax(hist.counts))
    sel = np.arange(hist.counts.shape[0]) > mode
    sel &= hist.counts > 0
    if np.count_nonzero(sel) < max(min_bins, 3):
        return None
    x = np.log10(hist.centers[sel])
    y = np.log10(hist.density[sel])
    fit = stats.linregress(x, y)
    return TailFit(slope=float(fit.slope), stderr=float(fit.stderr), n_bins=int(np.count_nonzero(sel)))
