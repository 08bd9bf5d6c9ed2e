"""Random sampling auction for private budgets.

A lottery over three deterministic truthful auctions:

* with probability mu/3 a Vickrey auction on capped values that only sells
  when the top capped value beats gamma times the runner-up;
* with probability 2mu/3 a random split into S and T, then a take-it-or-
  leave-it offer at (max capped value in T)/gamma to agents of S in index
  order;
* otherwise a random split where each side gets half the good at unit
  price beta * OPT(other side).

Randomness is drawn from a seeded numpy generator so a seed fixes the whole
run. :func:`exact_expectation` enumerates every partition instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .demand import best_response, v_bar
from .model import DomainError, Instance, Outcome
from .welfare import SubsetOpt, exact_opt_agents, welfare

MV1, MV2, RS = "MV1", "MV2", "RS"
MAX_ENUMERATION = 16


@dataclass(frozen=True)
class PrivateParams:
    beta: float = 3 / 10
    gamma: float = math.sqrt(10 / 9)
    mu: float = 5 / 7

    def __post_init__(self):
        if not 0 < self.beta < 0.5:
            raise DomainError(f"beta must lie in (0, 1/2), got {self.beta}")
        if not self.gamma > 1:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")
        if not 0 <= self.mu <= 1:
            raise DomainError(f"mu must lie in [0, 1], got {self.mu}")


@dataclass(frozen=True)
class Randomness:
    branch: str
    partition: tuple[bool, ...] | None = None  # True = agent in S


@dataclass(frozen=True)
class BranchExpectation:
    ev_mv1: float
    ev_mv2: float
    ev_rs: float
    total: float


def _argmax(values: Sequence[float], skip: int | None = None, prefer_high: bool = False) -> int | None:
    best = None
    for i, v in enumerate(values):
        if i == skip:
            continue
        if best is None or v > values[best] or (prefer_high and v == values[best]):
            best = i
    return best


def run_mv1(instance: Instance, gamma: float = PrivateParams.gamma, tie_break: str = "lowest") -> Outcome:
    """Vickrey on capped values with a multiplicative gap.

    ``gamma=1`` with ``tie_break="highest"`` gives the plain Vickrey auction
    that favours the later agent on ties (not truthful under budgets).
    """
    vb = [v_bar(a) for a in instance.agents]
    high = tie_break == "highest"
    i1 = _argmax(vb, prefer_high=high)
    i2 = _argmax(vb, skip=i1, prefer_high=high)
    second = vb[i2] if i2 is not None else 0.0
    x = [0.0] * instance.n
    p = [0.0] * instance.n
    price = gamma * second
    if vb[i1] >= price:
        x[i1], p[i1] = 1.0, price
    return Outcome(x, p)


def run_mv2(instance: Instance, partition: Sequence[bool], gamma: float = PrivateParams.gamma) -> Outcome:
    """Fixed-price offer to S in index order, priced off the best of T."""
    vb = [v_bar(a) for a in instance.agents]
    vt = max((v for v, s in zip(vb, partition) if not s), default=0.0)
    price = vt / gamma
    x = [0.0] * instance.n
    p = [0.0] * instance.n
    for i, in_s in enumerate(partition):
        if in_s and vb[i] >= price:
            x[i], p[i] = 1.0, price
            break
    return Outcome(x, p)


def _sell_side(instance: Instance, members: list[int], price: float, x: list[float], p: list[float]) -> None:
    remaining = 0.5
    for i in members:
        a = instance.agents[i]
        if price > 0:
            cap = a.budget / price
            xi = best_response(a.valuation, price, min(remaining, cap))
            # price * (B / price) can round above B
            pay = a.budget if xi >= cap else price * xi
        else:
            xi = best_response(a.valuation, 0.0, remaining)
            pay = 0.0
        x[i], p[i] = xi, pay
        remaining -= xi


def run_rs(instance: Instance, partition: Sequence[bool], params: PrivateParams = PrivateParams(),
           opt: Callable[[list[int]], float] | None = None) -> Outcome:
    """Random sampling half: each side buys at beta * OPT(other side).

    ``opt`` maps a list of agent indices to their optimal liquid welfare;
    by default it is computed exactly from the reported agents.
    """
    if opt is None:
        def opt(members):
            return exact_opt_agents([instance.agents[i] for i in members])[0]
    s_side = [i for i, s in enumerate(partition) if s]
    t_side = [i for i, s in enumerate(partition) if not s]
    x = [0.0] * instance.n
    p = [0.0] * instance.n
    _sell_side(instance, s_side, params.beta * opt(t_side), x, p)
    _sell_side(instance, t_side, params.beta * opt(s_side), x, p)
    return Outcome(x, p)


def draw_randomness(n: int, params: PrivateParams, rng: np.random.Generator) -> Randomness:
    u = rng.random()
    if u < params.mu / 3:
        return Randomness(MV1)
    branch = MV2 if u < params.mu else RS
    coins = rng.integers(0, 2, size=n)
    return Randomness(branch, tuple(bool(c) for c in coins))


def run_with(instance: Instance, randomness: Randomness, params: PrivateParams = PrivateParams()) -> Outcome:
    if randomness.branch == MV1:
        return run_mv1(instance, params.gamma)
    if randomness.branch == MV2:
        return run_mv2(instance, randomness.partition, params.gamma)
    if randomness.branch == RS:
        return run_rs(instance, randomness.partition, params)
    raise DomainError(f"unknown branch {randomness.branch!r}")


def run_private(instance: Instance, params: PrivateParams = PrivateParams(), seed: int = 0) -> tuple[Outcome, Randomness]:
    rng = np.random.default_rng(seed)
    randomness = draw_randomness(instance.n, params, rng)
    return run_with(instance, randomness, params), randomness


def partitions(n: int):
    """All 2^n partitions in index order; bit i of the index puts agent i in S."""
    for code in range(1 << n):
        yield tuple(bool(code >> i & 1) for i in range(n))


def exact_expectation(instance: Instance, params: PrivateParams = PrivateParams()) -> BranchExpectation:
    n = instance.n
    if n > MAX_ENUMERATION:
        raise DomainError(f"exact expectation enumerates 2^n partitions; n={n} exceeds {MAX_ENUMERATION}")
    subsets = SubsetOpt(instance.agents)
    ev_mv1 = welfare(instance, run_mv1(instance, params.gamma))
    mv2 = np.empty(1 << n)
    rs = np.empty(1 << n)
    for code, part in enumerate(partitions(n)):
        mv2[code] = welfare(instance, run_mv2(instance, part, params.gamma))
        rs[code] = welfare(instance, run_rs(instance, part, params, opt=subsets.of))
    ev_mv2 = float(np.sum(mv2)) / (1 << n)
    ev_rs = float(np.sum(rs)) / (1 << n)
    total = params.mu / 3 * ev_mv1 + 2 * params.mu / 3 * ev_mv2 + (1 - params.mu) * ev_rs
    return BranchExpectation(ev_mv1, ev_mv2, ev_rs, total)
