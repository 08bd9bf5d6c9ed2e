"""Domain types: valuation curves, agents, instances and outcomes.

Everything here is immutable. Valuations are either linear (a value rate per
unit of the good) or piecewise linear through a table of breakpoints that
starts at (0, 0) and ends at x = 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

SUPPLY_EPS = 1e-12


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class InstanceFormatError(ValueError):
    """Raised when an instance document cannot be parsed.

    The message names the offending field, e.g. ``agents[2].budget``.
    """


@dataclass(frozen=True)
class ValuationCurve:
    kind: str
    rate: float = 0.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "linear":
            if not (math.isfinite(self.rate) and self.rate >= 0):
                raise DomainError(f"linear rate must be finite and >= 0, got {self.rate!r}")
        elif self.kind == "pwl":
            pts = tuple((float(x), float(v)) for x, v in self.points)
            object.__setattr__(self, "points", pts)
            if len(pts) < 2:
                raise DomainError("pwl curve needs at least two breakpoints")
            if pts[0] != (0.0, 0.0):
                raise DomainError("pwl curve must start at (0, 0)")
            if pts[-1][0] != 1.0:
                raise DomainError("pwl curve must end at x = 1")
            for (x0, v0), (x1, v1) in zip(pts, pts[1:]):
                if not x1 > x0:
                    raise DomainError("pwl breakpoints must be strictly increasing in x")
                if not (math.isfinite(v1) and v1 >= v0):
                    raise DomainError("pwl values must be finite and nondecreasing")
        else:
            raise DomainError(f"unknown valuation kind {self.kind!r}")

    @classmethod
    def linear(cls, rate: float) -> "ValuationCurve":
        return cls("linear", rate=float(rate))

    @classmethod
    def pwl(cls, points: Sequence[Sequence[float]]) -> "ValuationCurve":
        return cls("pwl", points=tuple((float(x), float(v)) for x, v in points))

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    def breakpoints(self) -> tuple[tuple[float, float], ...]:
        """Breakpoint table; a linear curve is the segment (0, 0)-(1, rate)."""
        if self.is_linear:
            return ((0.0, 0.0), (1.0, self.rate))
        return self.points

    def scaled(self, factor: float) -> "ValuationCurve":
        """Same curve with every value multiplied by ``factor``."""
        if self.is_linear:
            return ValuationCurve.linear(self.rate * factor)
        return ValuationCurve.pwl([(x, v * factor) for x, v in self.points])

    def max_slope(self) -> float:
        if self.is_linear:
            return self.rate
        return max((v1 - v0) / (x1 - x0) for (x0, v0), (x1, v1) in zip(self.points, self.points[1:]))

    def to_dict(self) -> dict[str, Any]:
        if self.is_linear:
            return {"kind": "linear", "rate": self.rate}
        return {"kind": "pwl", "points": [[x, v] for x, v in self.points]}


@dataclass(frozen=True)
class Agent:
    budget: float
    valuation: ValuationCurve

    def __post_init__(self):
        if not (math.isfinite(self.budget) and self.budget >= 0):
            raise DomainError(f"budget must be finite and >= 0, got {self.budget!r}")

    @classmethod
    def linear(cls, rate: float, budget: float) -> "Agent":
        return cls(float(budget), ValuationCurve.linear(rate))

    @property
    def rate(self) -> float:
        """Per-unit value of a linear agent."""
        if not self.valuation.is_linear:
            raise DomainError("agent valuation is not linear")
        return self.valuation.rate


@dataclass(frozen=True)
class Instance:
    agents: tuple[Agent, ...]
    regime: str = "private"

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise DomainError("an instance needs at least one agent")
        if self.regime not in ("public", "private"):
            raise DomainError(f"regime must be 'public' or 'private', got {self.regime!r}")
        if self.regime == "public" and not self.all_linear:
            raise DomainError("public-budget instances require linear valuations")

    def __len__(self) -> int:
        return len(self.agents)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def all_linear(self) -> bool:
        return all(a.valuation.is_linear for a in self.agents)

    @property
    def budgets(self) -> list[float]:
        return [a.budget for a in self.agents]

    @property
    def rates(self) -> list[float]:
        return [a.rate for a in self.agents]

    def replace_agent(self, i: int, agent: Agent) -> "Instance":
        agents = list(self.agents)
        agents[i] = agent
        return Instance(tuple(agents), self.regime)

    def to_dict(self) -> dict[str, Any]:
        return {
            "regime": self.regime,
            "agents": [{"budget": a.budget, "valuation": a.valuation.to_dict()} for a in self.agents],
        }


@dataclass(frozen=True)
class Outcome:
    allocations: tuple[float, ...]
    payments: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "allocations", tuple(float(x) for x in self.allocations))
        object.__setattr__(self, "payments", tuple(float(p) for p in self.payments))
        if len(self.allocations) != len(self.payments):
            raise DomainError("allocation and payment vectors differ in length")

    @classmethod
    def empty(cls, n: int) -> "Outcome":
        return cls((0.0,) * n, (0.0,) * n)

    def __len__(self) -> int:
        return len(self.allocations)


def evaluate_valuation(curve: ValuationCurve, x: float) -> float:
    """Value of the fraction ``x`` of the good under ``curve``."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"fraction must lie in [0, 1], got {x!r}")
    if curve.is_linear:
        return curve.rate * x
    pts = curve.points
    # binary search for the segment containing x
    lo, hi = 0, len(pts) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pts[mid][0] <= x:
            lo = mid
        else:
            hi = mid
    x0, v0 = pts[lo]
    x1, v1 = pts[hi]
    if x == x0:
        return v0
    if x == x1:
        return v1
    return v0 + (v1 - v0) * (x - x0) / (x1 - x0)


def liquid_value(agent: Agent, x: float) -> float:
    """Budget-capped value min(v(x), B)."""
    return min(evaluate_valuation(agent.valuation, x), agent.budget)


def capped_breakpoints(agent: Agent) -> list[tuple[float, float]]:
    """Breakpoints of x -> min(v(x), B) on [0, 1], including the cap crossing."""
    cap = agent.budget
    out: list[tuple[float, float]] = []
    pts = agent.valuation.breakpoints()
    for (x0, v0), (x1, v1) in zip(pts, pts[1:]):
        if not out:
            out.append((x0, min(v0, cap)))
        if v0 < cap < v1:
            xc = x0 + (cap - v0) * (x1 - x0) / (v1 - v0)
            if x0 < xc < x1:
                out.append((xc, cap))
        out.append((x1, min(v1, cap)))
    return out


# -- JSON instance files --------------------------------------------------

def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_valuation(doc: Any, where: str) -> ValuationCurve:
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    kind = doc.get("kind")
    try:
        if kind == "linear":
            if "rate" not in doc:
                raise InstanceFormatError(f"{where}.rate: missing")
            return ValuationCurve.linear(_number(doc["rate"], f"{where}.rate"))
        if kind == "pwl":
            pts = doc.get("points")
            if not isinstance(pts, list):
                raise InstanceFormatError(f"{where}.points: expected a list of [x, v] pairs")
            parsed = []
            for j, p in enumerate(pts):
                if not isinstance(p, list) or len(p) != 2:
                    raise InstanceFormatError(f"{where}.points[{j}]: expected [x, v]")
                parsed.append((_number(p[0], f"{where}.points[{j}][0]"),
                               _number(p[1], f"{where}.points[{j}][1]")))
            return ValuationCurve.pwl(parsed)
    except DomainError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from exc
    raise InstanceFormatError(f"{where}.kind: expected 'linear' or 'pwl', got {kind!r}")


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level: expected an object")
    regime = doc.get("regime")
    if regime not in ("public", "private"):
        raise InstanceFormatError(f"regime: expected 'public' or 'private', got {regime!r}")
    raw = doc.get("agents")
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError("agents: expected a non-empty list")
    agents = []
    for i, a in enumerate(raw):
        where = f"agents[{i}]"
        if not isinstance(a, dict):
            raise InstanceFormatError(f"{where}: expected an object")
        if "budget" not in a:
            raise InstanceFormatError(f"{where}.budget: missing")
        budget = _number(a["budget"], f"{where}.budget")
        curve = _parse_valuation(a.get("valuation"), f"{where}.valuation")
        try:
            agents.append(Agent(budget, curve))
        except DomainError as exc:
            raise InstanceFormatError(f"{where}.budget: {exc}") from exc
    try:
        return Instance(tuple(agents), regime)
    except DomainError as exc:
        raise InstanceFormatError(f"regime: {exc}") from exc


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return instance_from_dict(doc)


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance.to_dict(), indent=2)


def load_instance(path: str | Path) -> Instance:
    return loads_instance(Path(path).read_text(encoding="utf-8"))


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance) + "\n", encoding="utf-8")
