import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wealthsim.flags import Flag
from wealthsim.metrics import (
    Binning, GiniRangeWarning, Histogram, gini, gini_flagged, histogram, snapshot, tail_slope, top_share,
)

values = st.one_of(st.just(0.0), st.floats(1e-6, 1e3))
nonneg = arrays(np.float64, st.integers(1, 50), elements=values).filter(lambda w: w.sum() > 0)


def gini_pairwise(w):
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    return np.abs(w[:, None] - w[None, :]).sum() / (2 * n * n * w.mean())


@pytest.mark.parametrize("c, n", [(1.0, 1000), (3.7, 5), (0.01, 2)])
def test_gini_equal_wealth_is_zero(c, n):
    assert gini(np.full(n, c)) == pytest.approx(0.0, abs=1e-12)


def test_gini_example():
    assert gini([1, 2, 3, 4]) == pytest.approx(0.25, abs=1e-12)
    assert gini_pairwise([1, 2, 3, 4]) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 10, 1000])
def test_gini_delta_distribution(n):
    w = np.zeros(n)
    w[-1] = 5.0
    assert gini(w) == pytest.approx((n - 1) / n, abs=1e-12)


def test_gini_brute_force_equivalence():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        w = rng.exponential(size=n) * rng.integers(0, 2, size=n)
        if w.sum() == 0:
            w[0] = 1.0
        assert abs(gini(w) - gini_pairwise(w)) <= 1e-10


@given(nonneg, st.floats(1e-3, 1e3))
def test_gini_scale_invariant(w, c):
    assert gini(c * w) == pytest.approx(gini(w), abs=1e-12)


@given(nonneg, st.randoms(use_true_random=False))
def test_gini_permutation_invariant(w, rnd):
    perm = list(range(len(w)))
    rnd.shuffle(perm)
    assert gini(w[perm]) == pytest.approx(gini(w), abs=1e-12)


@given(nonneg)
def test_gini_bounds(w):
    n = len(w)
    g = gini(w)
    assert -1e-12 <= g <= (n - 1) / n + 1e-12


def test_gini_rejects_zero_total():
    with pytest.raises(ValueError):
        gini([0.0, 0.0])
    with pytest.raises(ValueError):
        gini([-1.0, 1.0])


def test_gini_negative_wealth_is_literal_and_warns():
    w = [-1.0, 0.0, 2.0]
    with pytest.warns(GiniRangeWarning):
        g = gini(w)
    r = np.sort(w)
    assert g == pytest.approx(2 * (1 * r[0] + 2 * r[1] + 3 * r[2]) / (3 * r.sum()) - 4 / 3, abs=1e-12)
    assert g > 2 / 3
    g2, flags = gini_flagged(np.array(w))
    assert g2 == g and flags == {Flag.GINI_NEGATIVE_WEALTH}


def test_gini_flagged_zero_total():
    g, flags = gini_flagged(np.zeros(4))
    assert np.isnan(g) and Flag.GINI_ZERO_TOTAL in flags


def test_gini_no_warning_for_nonnegative():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gini([0.0, 1.0, 2.0])


def test_snapshot_fields():
    w = np.array([-1.0, 1.0, 4.0, 6.0])
    s = snapshot(w, 17, {Flag.Q_NO_RECEIVERS})
    assert s.t == 17 and s.total == 10.0 and s.max == 6.0 and s.min == -1.0
    assert s.neg_fraction == 0.25
    assert s.flags == {Flag.Q_NO_RECEIVERS, Flag.GINI_NEGATIVE_WEALTH}


def test_histogram_delta_linear():
    h = histogram(np.ones(1000), Binning.LINEAR, 50)
    assert h.counts.sum() == 1000
    assert np.count_nonzero(h.counts) == 1
    assert np.all(np.diff(h.edges) > 0)


def test_histogram_linear_example():
    h = histogram([1, 2, 3, 4], "linear", 2)
    assert h.edges.tolist() == [1.0, 2.5, 4.0]
    assert h.counts.tolist() == [2, 2]


def test_histogram_log_example():
    h = histogram([-1, 1, 10, 100], Binning.LOG, 2)
    assert h.underflow == 1
    assert h.edges.tolist() == [1.0, 10.0, 100.0]
    # 10 opens the second bin; 100 sits on the closed right edge of the same bin
    assert h.counts.tolist() == [1, 2]
    assert h.counts.sum() + h.underflow == 4


def test_histogram_log_counts_plus_underflow_total():
    rng = np.random.default_rng(3)
    w = rng.normal(1.0, 2.0, size=500)
    h = histogram(w, Binning.LOG, 25)
    assert h.counts.sum() + h.underflow == 500
    assert np.all(np.diff(h.edges) > 0)


def test_histogram_errors():
    with pytest.raises(ValueError):
        histogram([], Binning.LINEAR, 3)
    with pytest.raises(ValueError):
        histogram([-1.0, 0.0], Binning.LOG, 3)
    with pytest.raises(ValueError):
        histogram([1.0], Binning.LINEAR, 0)


def _log_hist(counts, ratio=2.0):
    edges = ratio ** np.arange(len(counts) + 1, dtype=float)
    return Histogram(Binning.LOG, edges, np.asarray(counts, dtype=np.int64))


def test_tail_slope_exact_power_law():
    # density m**-2 integrated over [2**k, 2**(k+1)] is 2**-(k+1): halving counts per bin
    counts = [2 ** (12 - k) for k in range(10)]
    fit = tail_slope(_log_hist(counts))
    assert fit.slope == pytest.approx(-2.0, abs=1e-9)
    assert fit.stderr == pytest.approx(0.0, abs=1e-9)
    assert fit.n_bins == 9


def test_tail_slope_flat_density_is_zero():
    # counts proportional to bin width: constant density
    counts = [10**4] + [2**k for k in range(1, 9)]
    h = _log_hist(counts)
    assert tail_slope(h).slope == pytest.approx(0.0, abs=1e-9)


def test_tail_slope_uniform_counts_on_log_bins():
    # equal counts per geometric bin means density 1/m
    h = _log_hist([500] + [100] * 8)
    assert tail_slope(h).slope == pytest.approx(-1.0, abs=1e-9)


def test_tail_slope_not_computable():
    assert tail_slope(_log_hist([100, 5, 3, 0, 0])) is None
    with pytest.raises(ValueError):
        tail_slope(histogram([1.0, 2.0, 3.0], Binning.LINEAR, 3))


def test_top_share():
    w = np.array([1.0] * 99 + [101.0])
    assert top_share(w, 0.01) == pytest.approx(101 / 200)
    assert top_share(np.ones(1000), 0.01) == pytest.approx(0.01)
