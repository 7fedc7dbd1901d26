"""Pairwise exchange kernels.

Three models share the same savings rule: each agent keeps the fraction
``lam`` of its wealth out of the exchange.

* R, random exchange: the pooled non-saved wealth is split by ``eps``.
* L, loan interest: ``i`` borrows from ``j``, pays interest ``rho`` on the
  lender's stake and alone absorbs the profit/loss ``delta`` of the joint stake.
* J, joint venture: both stakes scale by the same ``1 + delta``.

The kernels work on plain floats so they can be checked in isolation and
compiled unchanged by numba for the event loop.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .population import RngStream, select_pair


class Model(str, enum.Enum):
    R = "R"
    L = "L"
    J = "J"


@dataclass(frozen=True)
class ExchangeParams:
    model: Model = Model.R
    lam: float = 0.25
    rho: float = 0.0
    delta_w: float = 0.0
    # shifts the delta interval to [-delta_w + bias, delta_w + bias]
    delta_bias: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lambda must satisfy 0 <= lambda < 1, got {self.lam}")
        if not self.rho >= 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if not self.delta_w >= 0.0:
            raise ValueError(f"delta_w must be >= 0, got {self.delta_w}")


@dataclass(frozen=True)
class ExchangeDraw:
    i: int
    j: int
    epsilon: float | None = None
    delta: float | None = None


def delta_from_unit(u: float, delta_w: float, bias: float = 0.0) -> float:
    return delta_w * (2.0 * u - 1.0) + bias


def draw_exchange(rng: RngStream, n_agents: int, params: ExchangeParams) -> ExchangeDraw:
    """Consume the draws of one exchange event in the documented order."""
    i, j = select_pair(rng, n_agents)
    u = rng.uniform_unit()
    if params.model is Model.R:
        return ExchangeDraw(i, j, epsilon=u)
    return ExchangeDraw(i, j, delta=delta_from_unit(u, params.delta_w, params.delta_bias))


def apply_r(m_i: float, m_j: float, lam: float, epsilon: float) -> tuple[float, float]:
    pool = (1.0 - lam) * (m_i + m_j)
    return lam * m_i + epsilon * pool, lam * m_j + (1.0 - epsilon) * pool


def apply_l(m_i: float, m_j: float, lam: float, rho: float, delta: float) -> tuple[float, float]:
    """Loan exchange; ``m_i`` is the borrower, ``m_j`` the lender.

    Total wealth changes by ``(1 - lam) * delta * (m_i + m_j)``. The borrower
    may end up with negative wealth; nothing is clamped.
    """
    new_i = lam * m_i + (1.0 - lam) * (m_i - rho * m_j + delta * (m_i + m_j))
    new_j = lam * m_j + (1.0 - lam) * (1.0 + rho) * m_j
    return new_i, new_j


def apply_j(m_i: float, m_j: float, lam: float, delta: float) -> tuple[float, float]:
    # one shared factor keeps m_i / m_j fixed
    factor = lam + (1.0 - lam) * (1.0 + delta)
    return m_i * factor, m_j * factor
