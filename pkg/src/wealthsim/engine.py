"""Event loop, run orchestration and seed ensembles.

One exchange event advances ``t`` by one. At a period boundary the order is
exchange, then redistribution, then snapshot; redistribution takes no time.

The inner loop is compiled with numba from the very same kernel functions
used by :func:`step`, so the Python path doubles as a replay oracle.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .exchange import ExchangeParams, Model, apply_j, apply_l, apply_r, draw_exchange
from .flags import Flag
from .metrics import MetricsSnapshot, snapshot
from .population import Population, RngStream, init_uniform
from .redistribution import RedistributionParams, Scheme, apply_q, apply_t

WORKERS_ENV = "WEALTHSIM_WORKERS"

_MODEL_CODE = {Model.R: 0, Model.L: 1, Model.J: 2}

_r_jit = njit(apply_r)
_l_jit = njit(apply_l)
_j_jit = njit(apply_j)


@njit(cache=True)
def _exchange_events(wealth, buf, pos, n_events, model, lam, rho, delta_w, bias):
    """Run up to ``n_events`` events from the draw buffer, in place.

    Returns ``(events_done, new_pos)``. An event whose draws would run past
    the buffer is not started, so the caller can refill and resume.
    """
    n = wealth.shape[0]
    size = buf.shape[0]
    done = 0
    while done < n_events:
        p = pos
        if p >= size:
            break
        i = int(buf[p] * n)
        if i >= n:
            i = n - 1
        p += 1
        j = i
        while j == i and p < size:
            j = int(buf[p] * n)
            if j >= n:
                j = n - 1
            p += 1
        if j == i or p >= size:
            break
        u = buf[p]
        p += 1
        if model == 0:
            a, b = _r_jit(wealth[i], wealth[j], lam, u)
        else:
            delta = delta_w * (2.0 * u - 1.0) + bias
            if model == 1:
                a, b = _l_jit(wealth[i], wealth[j], lam, rho, delta)
            else:
                a, b = _j_jit(wealth[i], wealth[j], lam, delta)
        wealth[i] = a
        wealth[j] = b
        pos = p
        done += 1
    return done, pos


def advance(pop: Population, params: ExchangeParams, rng: RngStream, n_events: int) -> None:
    """Apply ``n_events`` exchange events through the compiled loop."""
    code = _MODEL_CODE[params.model]
    left = int(n_events)
    while left > 0:
        buf, pos = rng.buffer()
        done, pos = _exchange_events(
            pop.wealth, buf, pos, left, code,
            params.lam, params.rho, params.delta_w, params.delta_bias,
        )
        rng.consume_to(pos)
        pop.t += done
        left -= done
        if left > 0:
            rng.refill()


def step(pop: Population, params: ExchangeParams, rng: RngStream):
    """One exchange event in pure Python. Returns the draw that was used."""
    draw = draw_exchange(rng, pop.n_agents, params)
    w = pop.wealth
    i, j = draw.i, draw.j
    if params.model is Model.R:
        w[i], w[j] = apply_r(w[i], w[j], params.lam, draw.epsilon)
    elif params.model is Model.L:
        w[i], w[j] = apply_l(w[i], w[j], params.lam, params.rho, draw.delta)
    else:
        w[i], w[j] = apply_j(w[i], w[j], params.lam, draw.delta)
    pop.t += 1
    return draw


def default_snapshot_times(total_steps: int, per_decade: int = 10) -> list[int]:
    """0, total_steps and log-spaced times with ``per_decade`` points per decade."""
    times = {0, int(total_steps)}
    if total_steps >= 1:
        k = 0
        while True:
            t = int(round(10.0 ** (k / per_decade)))
            if t > total_steps:
                break
            times.add(t)
            k += 1
    return sorted(times)


@dataclass(frozen=True)
class RunConfig:
    exchange: ExchangeParams = field(default_factory=ExchangeParams)
    redistribution: RedistributionParams = field(default_factory=RedistributionParams)
    n_agents: int = 1000
    initial_wealth: float = 1.0
    total_steps: int = 100_000
    snapshot_times: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2, got {self.n_agents}")
        if not math.isfinite(self.initial_wealth):
            raise ValueError("initial_wealth must be finite")
        if self.total_steps < 0:
            raise ValueError("total_steps must be >= 0")
        if self.snapshot_times is None:
            object.__setattr__(self, "snapshot_times", tuple(default_snapshot_times(self.total_steps)))
        times = tuple(int(t) for t in self.snapshot_times)
        if list(times) != sorted(set(times)):
            raise ValueError("snapshot_times must be strictly increasing")
        if times and (times[0] < 0 or times[-1] > self.total_steps):
            raise ValueError("snapshot_times must lie within [0, total_steps]")
        object.__setattr__(self, "snapshot_times", times)
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def digest(self) -> str:
        """Hash of everything except the seed."""
        from .experiment import serialize_config

        text = serialize_config(replace(self, seed=0))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RedistributionEvent:
    t: int
    flag: Flag | None


@dataclass
class Trajectory:
    snapshots: list[MetricsSnapshot]
    final_wealth: np.ndarray
    config_digest: str
    seed: int
    redistributions: list[RedistributionEvent] = field(default_factory=list)
    # wealth vectors at snapshot times, only filled with record_wealth=True
    wealth_at: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots], dtype=np.int64)

    @property
    def gini(self) -> np.ndarray:
        return np.array([s.gini for s in self.snapshots])

    def at(self, t: int) -> MetricsSnapshot:
        for s in self.snapshots:
            if s.t == t:
                return s
        raise KeyError(f"no snapshot at t={t}")


def _boundaries(config: RunConfig) -> list[int]:
    stops = set(config.snapshot_times) | {config.total_steps}
    red = config.redistribution
    if red.scheme is not Scheme.NONE:
        stops.update(range(red.t_p, config.total_steps + 1, red.t_p))
    return sorted(stops)


def redistribute(wealth: np.ndarray, params: RedistributionParams) -> tuple[np.ndarray, Flag | None]:
    if params.scheme is Scheme.T:
        return apply_t(wealth, params.xi), None
    if params.scheme is Scheme.Q:
        return apply_q(wealth, params.xi, params.q)
    return wealth, None


def run(config: RunConfig, record_wealth: bool = False) -> Trajectory:
    pop = init_uniform(config.n_agents, config.initial_wealth)
    rng = RngStream(config.seed)
    red = config.redistribution
    wanted = set(config.snapshot_times)
    snaps: list[MetricsSnapshot] = []
    events: list[RedistributionEvent] = []
    pending: set[Flag] = set()
    kept: dict[int, np.ndarray] = {}

    for stop in _boundaries(config):
        advance(pop, config.exchange, rng, stop - pop.t)
        if red.scheme is not Scheme.NONE and stop > 0 and stop % red.t_p == 0:
            pop.wealth, flag = redistribute(pop.wealth, red)
            events.append(RedistributionEvent(stop, flag))
            if flag is not None:
                pending.add(flag)
        if stop in wanted:
            snaps.append(snapshot(pop.wealth, pop.t, pending))
            pending = set()
            if record_wealth:
                kept[stop] = pop.wealth.copy()

    return Trajectory(
        snapshots=snaps,
        final_wealth=pop.wealth.copy(),
        config_digest=config.digest(),
        seed=config.seed,
        redistributions=events,
        wealth_at=kept,
    )


@dataclass
class EnsembleResult:
    per_seed: list[Trajectory]
    times: np.ndarray
    mean_gini: np.ndarray
    std_gini: np.ndarray
    # False for a single seed, where std_gini is reported as zeros
    std_defined: bool = True

    @property
    def n_seeds(self) -> int:
        return len(self.per_seed)

    def final_mean(self) -> float:
        return float(self.mean_gini[-1])

    def final_std(self) -> float:
        return float(self.std_gini[-1])

    def flag_rate(self) -> float:
        """Fraction of redistribution applications that were skipped as degenerate."""
        events = [e for tr in self.per_seed for e in tr.redistributions]
        if not events:
            return 0.0
        return sum(e.flag is not None for e in events) / len(events)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_many(configs: list[RunConfig], workers: int | None = None) -> list[Trajectory]:
    """Run independent configs, results in input order."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(configs) <= 1:
        return [run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


def aggregate(trajectories: list[Trajectory]) -> EnsembleResult:
    if not trajectories:
        raise ValueError("empty ensemble")
    times = trajectories[0].times
    if any(tr.config_digest != trajectories[0].config_digest for tr in trajectories):
        raise ValueError("ensemble members must share the config apart from the seed")
    g = np.vstack([tr.gini for tr in trajectories])
    if len(trajectories) > 1:
        std, defined = g.std(axis=0, ddof=1), True
    else:
        std, defined = np.zeros(g.shape[1]), False
    return EnsembleResult(trajectories, times, g.mean(axis=0), std, defined)


def run_ensemble(config: RunConfig, n_seeds: int, base_seed: int | None = None,
                 workers: int | None = None) -> EnsembleResult:
    """Seeds ``base_seed + k`` for k in range(n_seeds); defaults to ``config.seed``."""
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    base = config.seed if base_seed is None else int(base_seed)
    configs = [replace(config, seed=base + k) for k in range(n_seeds)]
    return aggregate(run_many(configs, workers))
