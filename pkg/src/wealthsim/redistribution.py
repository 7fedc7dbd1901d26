"""Population-wide redistribution applied every ``t_p`` exchange events.

Both schemes read a frozen copy of the wealth vector and return a new one,
so every agent pays and receives against the same pre-transfer state.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .flags import Flag


class Scheme(str, enum.Enum):
    NONE = "none"
    T = "T"
    Q = "Q"


@dataclass(frozen=True)
class RedistributionParams:
    scheme: Scheme = Scheme.NONE
    xi: float = 0.5
    t_p: int = 100_000
    q: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must satisfy 0 <= xi <= 1, got {self.xi}")
        if int(self.t_p) != self.t_p or self.t_p < 1:
            raise ValueError(f"t_p must be a positive integer, got {self.t_p}")
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"q must be an integer >= 1, got {self.q}")


@dataclass(frozen=True)
class QuantileStats:
    m_max: float
    threshold: float
    n_q: int
    s_q: float
    flag: Flag | None = None


def _as_vector(wealth) -> np.ndarray:
    w = np.asarray(wealth, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError("wealth must be a 1-D vector")
    return w


def apply_t(wealth, xi: float) -> np.ndarray:
    """Every agent gives ``xi`` of its wealth, split equally among the others.

    Uses ``(1 - xi*N/(N-1)) * w_i + xi * S/(N-1)``, which is the leave-one-out
    form rewritten in terms of the total ``S``.
    """
    w = _as_vector(wealth)
    n = w.shape[0]
    if n < 2:
        raise ValueError("transfer needs at least 2 agents")
    total = np.sum(w)
    return (1.0 - xi * n / (n - 1)) * w + xi * total / (n - 1)


def quantile_stats(wealth, q: int) -> QuantileStats:
    w = _as_vector(wealth)
    if w.shape[0] < 1:
        raise ValueError("empty wealth vector")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    m_max = float(np.max(w))
    threshold = m_max / q
    above = w > threshold
    n_q = int(w.shape[0] - np.count_nonzero(above))
    s_q = float(np.sum(w[above]))
    flag = None
    if m_max <= 0.0:
        flag = Flag.Q_NONPOSITIVE_MAX
    elif n_q == 0:
        flag = Flag.Q_NO_RECEIVERS
    return QuantileStats(m_max=m_max, threshold=threshold, n_q=n_q, s_q=s_q, flag=flag)


def apply_q(wealth, xi: float, q: int) -> tuple[np.ndarray, Flag | None]:
    """Agents above ``max/q`` pay ``xi`` of their wealth; the rest share it equally.

    Agents exactly at the threshold receive. Returns the new vector and a
    degeneracy flag; on degeneracy the input is returned unchanged (copied).
    """
    w = _as_vector(wealth)
    stats = quantile_stats(w, q)
    if stats.flag is not None:
        return w.copy(), stats.flag
    above = w > stats.threshold
    share = xi * stats.s_q / stats.n_q
    out = np.where(above, (1.0 - xi) * w, w + share)
    return out, None
