"""Liquid welfare of outcomes and the optimal liquid welfare.

Three optimisers are provided:

* :func:`opt_linear_greedy` -- exact for linear valuations (fill agents in
  decreasing rate order up to their budget cap B/v).
* :func:`opt_dp` -- dynamic program over a uniform grid of the unit of good.
* :func:`opt_exact` -- exact for any piecewise-linear valuations. Some optimum
  has every agent but one sitting on a breakpoint of its capped curve, so we
  enumerate Pareto-optimal breakpoint combinations of all agents but one and
  hand the leftover supply to the remaining agent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import (
    Agent,
    DomainError,
    Instance,
    Outcome,
    capped_breakpoints,
    liquid_value,
)

MAX_ALIGNED_GRID = 20_000


@dataclass(frozen=True)
class OptResult:
    value: float
    allocation: tuple[float, ...]
    method: str
    grid_resolution: int | None = None
    exact: bool = True


def welfare(instance: Instance, outcome: Outcome) -> float:
    if len(outcome) != instance.n:
        raise DomainError(f"outcome has {len(outcome)} entries for {instance.n} agents")
    return math.fsum(liquid_value(a, min(x, 1.0)) for a, x in zip(instance.agents, outcome.allocations))


def revenue(outcome: Outcome) -> float:
    return math.fsum(outcome.payments)


def _rate_order(instance: Instance) -> list[int]:
    return sorted(range(instance.n), key=lambda i: (-instance.agents[i].rate, i))


def opt_linear_greedy(instance: Instance) -> OptResult:
    """Exact optimum for linear valuations.

    Agents are visited by decreasing rate (ties by index); each takes
    min(B/v, remaining supply). Zero-rate agents take nothing.
    """
    if not instance.all_linear:
        raise DomainError("greedy optimum requires linear valuations")
    x = [0.0] * instance.n
    remaining = 1.0
    for i in _rate_order(instance):
        a = instance.agents[i]
        if a.rate <= 0 or remaining <= 0:
            continue
        take = min(a.budget / a.rate, remaining)
        x[i] = take
        remaining = max(remaining - take, 0.0)
    value = math.fsum(liquid_value(a, xi) for a, xi in zip(instance.agents, x))
    return OptResult(value, tuple(x), "greedy-linear")


def opt_upper_bound(instance: Instance, j: int) -> float:
    """Bound sum_{i<=j} B_i + v_{j+1} (1 - sum_{i<=j} B_i / v_i) on OPT.

    ``j`` is 1-based in decreasing-rate order and must lie in [1, n-1].
    The bracket may be negative; the bound still holds.
    """
    if not instance.all_linear:
        raise DomainError("upper bound requires linear valuations")
    n = instance.n
    if not 1 <= j <= n - 1:
        raise DomainError(f"j must lie in [1, {n - 1}], got {j}")
    order = _rate_order(instance)
    head = [instance.agents[i] for i in order[:j]]
    if any(a.rate == 0 for a in head):
        raise DomainError("zero rate among the first j agents")
    v_next = instance.agents[order[j]].rate
    total_b = math.fsum(a.budget for a in head)
    if v_next == 0:
        return total_b
    return total_b + v_next * (1.0 - math.fsum(a.budget / a.rate for a in head))


# -- grid dynamic program --------------------------------------------------

def _aligned_denominator(xs: Sequence[float], limit: int = 10**6) -> int | None:
    den = 1
    for x in xs:
        f = Fraction(x).limit_denominator(limit)
        if float(f) != x:
            return None
        den = den * f.denominator // math.gcd(den, f.denominator)
    return den


def grid_error_bound(instance: Instance, m: int) -> float:
    """Worst-case shortfall of the grid optimum against the continuous one.

    Rounding every coordinate of an optimal allocation down to the grid
    keeps it feasible and loses at most (max slope)/m per agent.
    """
    return math.fsum(min(a.valuation.max_slope() / m, a.budget) for a in instance.agents)


def opt_dp(instance: Instance, m: int) -> OptResult:
    """Grid dynamic program over allocations in {0, 1/m, ..., 1}.

    If every breakpoint of every capped curve is a rational with a small
    denominator, the grid is refined to a common multiple so that it
    contains them all, which makes the result exact.
    """
    if m < 1:
        raise DomainError(f"grid resolution must be >= 1, got {m}")
    xs = [x for a in instance.agents for x, _ in capped_breakpoints(a)]
    den = _aligned_denominator(xs)
    exact = False
    if den is not None:
        aligned = m * den // math.gcd(m, den)
        if aligned <= max(MAX_ALIGNED_GRID, m):
            m, exact = aligned, True

    grid = np.arange(m + 1) / m
    tables = []
    for a in instance.agents:
        pts = a.valuation.breakpoints()
        vals = np.interp(grid, [p[0] for p in pts], [p[1] for p in pts])
        tables.append(np.minimum(vals, a.budget))

    best = tables[0].copy()
    choices = [np.arange(m + 1)]
    for f in tables[1:]:
        new = f[0] + best
        pick = np.zeros(m + 1, dtype=np.int64)
        for t in range(1, m + 1):
            cand = f[t] + best[: m + 1 - t]
            better = cand > new[t:]
            if better.any():
                new[t:][better] = cand[better]
                pick[t:][better] = t
        best = new
        choices.append(pick)

    units = [0] * instance.n
    c = m
    for i in range(instance.n - 1, -1, -1):
        t = int(choices[i][c])
        units[i] = t
        c -= t
    alloc = tuple(u / m for u in units)
    value = math.fsum(liquid_value(a, x) for a, x in zip(instance.agents, alloc))
    return OptResult(value, alloc, "dp-grid", grid_resolution=m, exact=exact)


# -- exact breakpoint enumeration ------------------------------------------

# A front is a list of (used, value, picks) with used strictly increasing and
# value strictly increasing: no state is dominated by another.
Front = list[tuple[float, float, tuple[float, ...]]]


def _extend_front(front: Front, agent: Agent) -> Front:
    options = capped_breakpoints(agent)
    states = []
    for used, val, picks in front:
        for x, v in options:
            w = used + x
            if w <= 1.0:
                states.append((w, val + v, picks + (x,)))
    states.sort(key=lambda s: (s[0], -s[1]))
    out: Front = []
    for s in states:
        if not out or s[1] > out[-1][1]:
            out.append(s)
    return out


def _front(agents: Sequence[Agent]) -> Front:
    front: Front = [(0.0, 0.0, ())]
    for a in agents:
        front = _extend_front(front, a)
    return front


def _fill(front: Front, agent: Agent) -> tuple[float, float, tuple[float, ...]]:
    """Best completion of ``front`` giving all leftover supply to ``agent``."""
    best = (-1.0, 0.0, ())
    for used, val, picks in front:
        rest = max(1.0 - used, 0.0)
        total = val + liquid_value(agent, rest)
        if total > best[0]:
            best = (total, rest, picks)
    return best


def exact_opt_agents(agents: Sequence[Agent]) -> tuple[float, tuple[float, ...]]:
    """Optimal liquid welfare of an arbitrary agent list (0 for no agents)."""
    n = len(agents)
    if n == 0:
        return 0.0, ()
    best_val, best_alloc = -1.0, ()
    for f in range(n):
        others = [a for j, a in enumerate(agents) if j != f]
        total, rest, picks = _fill(_front(others), agents[f])
        if total > best_val:
            alloc = list(picks)
            alloc.insert(f, rest)
            best_val, best_alloc = total, tuple(alloc)
    value = math.fsum(liquid_value(a, x) for a, x in zip(agents, best_alloc))
    return value, best_alloc


def opt_exact(instance: Instance) -> OptResult:
    value, alloc = exact_opt_agents(instance.agents)
    return OptResult(value, alloc, "exact-breakpoint")


class SubsetOpt:
    """Memoised optimal liquid welfare for every subset of an instance.

    Subsets are bitmasks over agent indices. Fronts are built incrementally
    by adding the highest member, so enumerating all 2^n subsets reuses work.
    """

    def __init__(self, agents: Sequence[Agent]):
        self.agents = tuple(agents)
        self._fronts: dict[int, Front] = {0: [(0.0, 0.0, ())]}
        self._opt: dict[int, float] = {0: 0.0}

    def front(self, mask: int) -> Front:
        if mask not in self._fronts:
            top = mask.bit_length() - 1
            self._fronts[mask] = _extend_front(self.front(mask & ~(1 << top)), self.agents[top])
        return self._fronts[mask]

    def value(self, mask: int) -> float:
        if mask not in self._opt:
            best = 0.0
            m = mask
            while m:
                low = m & -m
                f = low.bit_length() - 1
                best = max(best, _fill(self.front(mask & ~low), self.agents[f])[0])
                m &= m - 1
            self._opt[mask] = best
        return self._opt[mask]

    def of(self, members: Sequence[int]) -> float:
        mask = 0
        for i in members:
            mask |= 1 << i
        return self.value(mask)
