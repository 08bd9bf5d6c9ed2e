"""Random instances, outcome checks and truthfulness audits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import SUPPLY_EPS, Agent, Instance, Outcome, ValuationCurve, evaluate_valuation
from .private import PrivateParams, Randomness, draw_randomness, run_with
from .public import PaymentRule

UTILITY_TOL = 1e-9
BUDGET_RTOL = 1e-12


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    kind: str = "linear"  # "linear" | "pwl" | "mixed"
    k: int = 4  # interior breakpoints of pwl curves
    value_range: tuple[float, float] = (0.01, 100.0)
    budget_range: tuple[float, float] = (0.01, 100.0)
    regime: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind not in ("linear", "pwl", "mixed"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        for lo, hi in (self.value_range, self.budget_range):
            if not 0 < lo <= hi:
                raise ValueError("ranges must satisfy 0 < lo <= hi")
        if self.regime == "public" and self.kind != "linear":
            raise ValueError("public instances must be linear")


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _random_pwl(rng: np.random.Generator, k: int, total: float) -> ValuationCurve:
    xs = np.unique(rng.uniform(0.0, 1.0, size=k))
    xs = xs[(xs > 0) & (xs < 1)]
    steps = rng.random(len(xs) + 1)
    steps = steps / steps.sum() * total
    vals = np.cumsum(steps)
    pts = [(0.0, 0.0)] + [(float(x), float(v)) for x, v in zip(xs, vals[:-1])] + [(1.0, total)]
    # cumulative rounding may undercut an earlier value
    fixed = [pts[0]]
    for x, v in pts[1:]:
        fixed.append((x, max(v, fixed[-1][1])))
    return ValuationCurve.pwl(fixed)


def generate_instance(spec: GeneratorSpec, seed: int | Sequence[int]) -> Instance:
    """Deterministic random instance; values and budgets are log-uniform."""
    rng = np.random.default_rng(seed)
    agents = []
    for _ in range(spec.n):
        scale = _log_uniform(rng, *spec.value_range)
        budget = _log_uniform(rng, *spec.budget_range)
        kind = spec.kind
        if kind == "mixed":
            kind = "pwl" if rng.random() < 0.5 else "linear"
        curve = ValuationCurve.linear(scale) if kind == "linear" else _random_pwl(rng, spec.k, scale)
        agents.append(Agent(budget, curve))
    regime = spec.regime or ("public" if spec.kind == "linear" else "private")
    return Instance(tuple(agents), regime)


def outcome_violations(instance: Instance, outcome: Outcome) -> list[str]:
    """Names of violated outcome invariants: supply, budget, sign."""
    flags = []
    if math.fsum(outcome.allocations) > 1.0 + SUPPLY_EPS:
        flags.append("supply")
    if any(p > a.budget + BUDGET_RTOL * max(1.0, a.budget) for a, p in zip(instance.agents, outcome.payments)):
        flags.append("budget")
    if any(x < 0 for x in outcome.allocations) or any(p < -BUDGET_RTOL for p in outcome.payments):
        flags.append("sign")
    return flags


@dataclass(frozen=True)
class Violation:
    agent: int
    report: tuple[float, ...]  # (rate,) for public; (value scale, budget) for private
    truthful_utility: float
    deviating_utility: float

    @property
    def gain(self) -> float:
        return self.deviating_utility - self.truthful_utility


def misreport_scales(grid: int) -> np.ndarray:
    """Multiplicative scalings 3/grid, 6/grid, ..., 3 (0.05 steps at grid=60)."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    return np.arange(1, grid + 1) * (3.0 / grid)


def audit_public(instance: Instance, grid: int = 60, seed: int | Sequence[int] = 0,
                 n_random: int = 32, tol: float = UTILITY_TOL) -> list[Violation]:
    """Check that no rate misreport raises any agent's utility v x - p."""
    rng = np.random.default_rng(seed)
    scales = misreport_scales(grid)
    rates = instance.rates
    out = []
    for i, v in enumerate(rates):
        ref = v if v > 0 else (max(rates) or 1.0)
        reports = list(scales * ref) + list(rng.uniform(0.0, 3.0 * ref, size=n_random))
        rule = PaymentRule(instance, i, 3.0 * ref)
        truthful = v * rule.allocation(v) - rule.payment(v)
        for r in reports:
            if r <= 0:
                continue
            dev = v * rule.allocation(r) - rule.payment(r)
            if dev > truthful + tol:
                out.append(Violation(i, (float(r),), truthful, dev))
    return out


def true_utility(agent: Agent, x: float, p: float) -> float:
    """v(x) - p, or -inf when the payment exceeds the true budget."""
    if p > agent.budget:
        return -math.inf
    return evaluate_valuation(agent.valuation, min(x, 1.0)) - p


def private_misreports(grid: int, rng: np.random.Generator, n_random: int) -> list[tuple[float, float]]:
    """(value scale, budget scale) pairs: each axis alone, both together, random pairs."""
    pairs = []
    for s in misreport_scales(grid):
        s = float(s)
        pairs += [(s, 1.0), (1.0, s), (s, s)]
    for sv, sb in rng.uniform(0.0, 3.0, size=(n_random, 2)):
        pairs.append((float(sv), float(sb)))
    return pairs


def audit_private(instance: Instance, mechanism: Callable[[Instance], Outcome], grid: int = 60,
                  seed: int | Sequence[int] = 0, n_random: int = 32,
                  tol: float = UTILITY_TOL) -> list[Violation]:
    """Audit a deterministic mechanism against value-curve and budget lies."""
    rng = np.random.default_rng(seed)
    truthful_outcome = mechanism(instance)
    out = []
    for i, agent in enumerate(instance.agents):
        truthful = true_utility(agent, truthful_outcome.allocations[i], truthful_outcome.payments[i])
        for sv, sb in private_misreports(grid, rng, n_random):
            lie = Agent(agent.budget * sb, agent.valuation.scaled(sv))
            res = mechanism(instance.replace_agent(i, lie))
            dev = true_utility(agent, res.allocations[i], res.payments[i])
            if dev > truthful + tol:
                out.append(Violation(i, (sv, lie.budget), truthful, dev))
    return out


def audit_truthfulness(instance: Instance, mechanism: str | Callable[[Instance], Outcome], grid: int = 60,
                       seed: int | Sequence[int] = 0, n_random: int = 32,
                       params: PrivateParams | None = None,
                       randomness: Randomness | None = None) -> list[Violation]:
    """Deviation audit.

    ``mechanism`` is ``"public"``, ``"private"`` (one fixed draw of the
    randomness, taken from ``seed`` unless given) or any deterministic
    callable, audited like the private mechanism.
    """
    if mechanism == "public":
        return audit_public(instance, grid, seed, n_random)
    if mechanism == "private":
        params = params or PrivateParams()
        if randomness is None:
            randomness = draw_randomness(instance.n, params, np.random.default_rng(seed))
        fixed = randomness

        def mechanism(inst: Instance) -> Outcome:
            return run_with(inst, fixed, params)

    if not callable(mechanism):
        raise ValueError(f"unknown mechanism {mechanism!r}")
    return audit_private(instance, mechanism, grid, seed, n_random)
