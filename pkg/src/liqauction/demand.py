"""Demand at a uniform unit price.

All maximisations here are over piecewise-linear objectives, so the
maximiser is found exactly by scanning breakpoints. Ties go to the largest
fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Agent, Instance, ValuationCurve, capped_breakpoints, evaluate_valuation, liquid_value


@dataclass(frozen=True)
class Demand:
    p: float
    x_star: float
    surplus: float


def v_bar(agent: Agent) -> float:
    """Capped value of the whole unit, min(v(1), B)."""
    return min(evaluate_valuation(agent.valuation, 1.0), agent.budget)


def _largest_argmax(candidates: list[tuple[float, float]]) -> tuple[float, float]:
    best_x, best_obj = 0.0, -math.inf
    for x, obj in candidates:
        if obj > best_obj or (obj == best_obj and x > best_x):
            best_x, best_obj = x, obj
    return best_x, best_obj


def demand_at(agent: Agent, p: float) -> Demand:
    """Largest maximiser of min(v(x), B) - p x over [0, 1]."""
    if p < 0:
        raise ValueError(f"price must be >= 0, got {p!r}")
    cands = [(x, v - p * x) for x, v in capped_breakpoints(agent)]
    x, obj = _largest_argmax(cands)
    return Demand(p, x, obj)


def w_of_p(instance: Instance, p: float) -> float:
    return math.fsum(liquid_value(a, demand_at(a, p).x_star) for a in instance.agents)


def best_response(curve: ValuationCurve, price: float, limit: float) -> float:
    """Largest maximiser of v(x) - price * x over x in [0, limit].

    This is the uncapped valuation; budget constraints enter only through
    ``limit``.
    """
    limit = min(max(limit, 0.0), 1.0)
    cands = [(x, v - price * x) for x, v in curve.breakpoints() if x < limit]
    cands.append((limit, evaluate_valuation(curve, limit) - price * limit))
    return _largest_argmax(cands)[0]
