import numpy as np
import pytest
from scipy import stats

from wealthsim.metrics import gini
from wealthsim.population import Population, RngStream, init_uniform, select_pair, total_wealth


def test_init_uniform_standard_population():
    pop = init_uniform(1000, 1.0)
    assert pop.n_agents == 1000
    assert pop.t == 0
    assert np.all(pop.wealth == 1.0)
    assert gini(pop.wealth) == 0.0


def test_init_uniform_zero_wealth_edge():
    pop = init_uniform(2, 0.0)
    assert pop.wealth.tolist() == [0.0, 0.0]


@pytest.mark.parametrize("n", [0, 1])
def test_init_uniform_rejects_small_populations(n):
    with pytest.raises(ValueError):
        init_uniform(n, 1.0)


def test_init_uniform_rejects_nonfinite():
    with pytest.raises(ValueError):
        init_uniform(10, float("nan"))


@pytest.mark.parametrize("wealth, expected", [
    (np.ones(1000), 1000.0),
    ([1, 2, 5, 10], 18.0),
    ([-1, 3], 2.0),
])
def test_total_wealth(wealth, expected):
    assert total_wealth(Population(np.asarray(wealth, dtype=float))) == expected


def test_uniform_unit_range_and_seed_validation():
    rng = RngStream(3, block_size=64)
    draws = [rng.uniform_unit() for _ in range(1000)]
    assert min(draws) >= 0.0 and max(draws) < 1.0
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2**64)


def test_stream_is_independent_of_block_size():
    a = RngStream(99, block_size=7)
    b = RngStream(99, block_size=4096)
    assert [a.uniform_unit() for _ in range(500)] == [b.uniform_unit() for _ in range(500)]


def test_stream_matches_documented_generator():
    gen = np.random.Generator(np.random.PCG64(2024))
    rng = RngStream(2024)
    assert [rng.uniform_unit() for _ in range(10)] == gen.random(10).tolist()


def test_select_pair_two_agents():
    rng = RngStream(5)
    pairs = {select_pair(rng, 2) for _ in range(200)}
    assert pairs == {(0, 1), (1, 0)}


def test_select_pair_draw_order():
    # i from the first draw, j redrawn until it differs
    rng = RngStream(8)
    gen = np.random.Generator(np.random.PCG64(8))
    for _ in range(200):
        i, j = select_pair(rng, 3)
        ei = int(gen.random() * 3)
        ej = int(gen.random() * 3)
        while ej == ei:
            ej = int(gen.random() * 3)
        assert (i, j) == (ei, ej)


def test_select_pair_deterministic():
    a, b = RngStream(42), RngStream(42)
    assert [select_pair(a, 50) for _ in range(100)] == [select_pair(b, 50) for _ in range(100)]


def test_select_pair_uniform_over_ordered_pairs():
    n, draws = 10, 10**6
    rng = RngStream(2718)
    counts = np.zeros((n, n), dtype=np.int64)
    for _ in range(draws):
        i, j = select_pair(rng, n)
        counts[i, j] += 1
    assert np.all(np.diag(counts) == 0)
    observed = counts[~np.eye(n, dtype=bool)]
    p = 1.0 / 90
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(observed - draws * p) <= 3 * sigma)
    assert stats.chisquare(observed).pvalue > 1e-3
