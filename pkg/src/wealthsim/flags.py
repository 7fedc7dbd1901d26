"""Non-fatal conditions recorded alongside simulation results."""
from __future__ import annotations

import enum


class Flag(str, enum.Enum):
    # quantile transfer skipped: every agent is above the threshold
    Q_NO_RECEIVERS = "q_no_receivers"
    # quantile transfer skipped: maximum wealth is not positive
    Q_NONPOSITIVE_MAX = "q_nonpositive_max"
    # Gini computed on a vector with negative entries, may leave [0, 1)
    GINI_NEGATIVE_WEALTH = "gini_negative_wealth"
    # Gini undefined because total wealth is zero
    GINI_ZERO_TOTAL = "gini_zero_total"


def format_flags(flags) -> str:
    return "|".join(sorted(f.value for f in flags))


def parse_flags(text: str) -> frozenset[Flag]:
    text = text.strip()
    if not text:
        return frozenset()
    return frozenset(Flag(part) for part in text.split("|"))
