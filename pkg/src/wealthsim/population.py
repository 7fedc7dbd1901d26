"""Simulation state and the reproducible random stream.

The random stream is numpy's PCG64 bit generator seeded directly with the
run seed; each unit draw is one ``Generator.random()`` double in [0, 1).
Draws are served from an internal block buffer, which does not change the
sequence because PCG64 doubles compose across block boundaries.

Per exchange event the draw order is fixed:

1. ``i = floor(u * N)``
2. ``j = floor(u * N)``, redrawn until ``j != i``
3. one more unit draw, turned into epsilon (R model) or delta (L, J).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SEED_MAX = 2**64 - 1


@dataclass
class Population:
    """Wealth of ``n_agents`` agents and the number of exchange events so far."""

    wealth: np.ndarray
    t: int = 0

    def __post_init__(self) -> None:
        self.wealth = np.ascontiguousarray(self.wealth, dtype=np.float64)
        if self.wealth.ndim != 1:
            raise ValueError("wealth must be a 1-D vector")
        if self.wealth.shape[0] < 2:
            raise ValueError(f"need at least 2 agents, got {self.wealth.shape[0]}")
        if self.t < 0:
            raise ValueError("t must be non-negative")

    @property
    def n_agents(self) -> int:
        return int(self.wealth.shape[0])


def init_uniform(n_agents: int, initial_wealth: float) -> Population:
    """Population of ``n_agents`` agents each holding ``initial_wealth``, at t = 0."""
    if n_agents < 2:
        raise ValueError(f"n_agents must be >= 2 for pair selection, got {n_agents}")
    if not np.isfinite(initial_wealth):
        raise ValueError("initial_wealth must be finite")
    return Population(np.full(n_agents, float(initial_wealth)), t=0)


def total_wealth(pop: Population | np.ndarray) -> float:
    w = pop.wealth if isinstance(pop, Population) else np.asarray(pop, dtype=np.float64)
    return float(np.sum(w, dtype=np.float64))


@dataclass
class RngStream:
    """Seeded stream of unit uniforms in [0, 1).

    Not safe for concurrent use; give every run its own stream.
    """

    seed: int
    block_size: int = 1 << 16
    _gen: np.random.Generator = field(init=False, repr=False)
    _buf: np.ndarray = field(init=False, repr=False)
    _pos: int = field(init=False, repr=False, default=0)

    def __post_init__(self) -> None:
        seed = int(self.seed)
        if not 0 <= seed <= SEED_MAX:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._buf = np.empty(0, dtype=np.float64)
        self._pos = 0

    def uniform_unit(self) -> float:
        if self._pos >= self._buf.shape[0]:
            self.refill()
        u = float(self._buf[self._pos])
        self._pos += 1
        return u

    def index(self, n: int) -> int:
        """Uniform integer in [0, n) from one unit draw."""
        k = int(self.uniform_unit() * n)
        # u * n can round up to n for u just below 1
        return k if k < n else n - 1

    # buffer access for the compiled event loop

    def refill(self) -> None:
        """Drop consumed draws and append a fresh block."""
        tail = self._buf[self._pos:]
        self._buf = np.concatenate([tail, self._gen.random(self.block_size)])
        self._pos = 0

    def buffer(self) -> tuple[np.ndarray, int]:
        return self._buf, self._pos

    def consume_to(self, pos: int) -> None:
        if not self._pos <= pos <= self._buf.shape[0]:
            raise ValueError("buffer position out of range")
        self._pos = pos


def select_pair(rng: RngStream, n_agents: int) -> tuple[int, int]:
    """Ordered pair (i, j), i != j: i first, then j redrawn until distinct."""
    if n_agents < 2:
        raise ValueError("select_pair needs n_agents >= 2")
    i = rng.index(n_agents)
    j = rng.index(n_agents)
    while j == i:
        j = rng.index(n_agents)
    return i, j
