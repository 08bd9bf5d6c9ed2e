"""Golden-ratio auction for public budgets and linear valuations.

Agents are ranked by reported rate (ties by index). The winner prefix has
size k, the largest index with sum_{j<=k} B_j / phi <= v_k. If that prefix
is rich enough to price out the next agent (case I) the prefix shares the
good in proportion to budgets at unit price p0 = sum B; otherwise (case II)
the price is p0 = phi * v_{k+1} and agent k+1 takes the remainder of a
1/phi share. Every prefix agent with rate below p0 is scaled down by v/p0.

Payments follow Myerson's rule. For a fixed profile of the other agents the
allocation of agent i, as a function of its report u, is piecewise constant,
linear (c*u) or hyperbolic (a - b/u); :func:`myerson_pieces` recovers those
pieces and payments integrate them in closed form.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable

from .model import DomainError, Instance, Outcome

PHI = (math.sqrt(5.0) + 1.0) / 2.0

STRATIFIED_SAMPLES = 16
MAX_BISECT_DEPTH = 60


@dataclass(frozen=True)
class GoldenParams:
    phi: float = PHI


@dataclass(frozen=True)
class AllocationRegime:
    k: int
    case: str
    p0: float
    sorted_order: tuple[int, ...]


@dataclass(frozen=True)
class RegimePiece:
    lo: float
    hi: float
    form: str  # "constant" | "linear" | "hyperbolic"
    coeffs: tuple[float, ...]

    def value(self, u: float) -> float:
        if self.form == "constant":
            return self.coeffs[0]
        if self.form == "linear":
            return self.coeffs[0] * u
        a, b = self.coeffs
        return a - b / u

    def integral(self, lo: float | None = None, hi: float | None = None) -> float:
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        if hi <= lo:
            return 0.0
        if self.form == "constant":
            return self.coeffs[0] * (hi - lo)
        if self.form == "linear":
            return self.coeffs[0] * (hi * hi - lo * lo) / 2.0
        a, b = self.coeffs
        return a * (hi - lo) - b * math.log(hi / lo)


def _check_public(instance: Instance) -> None:
    if instance.regime != "public":
        raise DomainError("golden-ratio auction needs a public-budget instance")
    if not instance.all_linear:
        raise DomainError("golden-ratio auction needs linear valuations")


def _regime(seq: list[tuple[float, float]]) -> tuple[int, bool, float, float]:
    """(k, is_case_one, p0, S_k) for (rate, budget) pairs in rank order."""
    n = len(seq)
    s = 0.0
    prefix = [0.0]
    k = 0
    for m, (v, b) in enumerate(seq, 1):
        s += b
        prefix.append(s)
        if s / PHI <= v:
            k = m
    v_next = seq[k][0] if k < n else 0.0
    s_k = prefix[k]
    case_one = s_k / PHI >= v_next
    p0 = s_k if case_one else PHI * v_next
    return k, case_one, p0, s_k


def _position_form(seq, r, k, case_one, p0, s_k) -> tuple[str, tuple[float, ...]]:
    """Closed form of the allocation of the agent at rank ``r`` (0-based)."""
    v, b = seq[r]
    if r < k:
        if p0 <= 0:
            return "constant", (0.0,)
        if v >= p0:
            return "constant", (b / p0,)
        return "linear", (b / (p0 * p0),)
    if not case_one and r == k:
        if s_k == 0:
            return "constant", (1.0 / PHI,)
        return "hyperbolic", (1.0 / PHI, s_k / (PHI * PHI))
    return "constant", (0.0,)


def _position_alloc(seq, r, k, case_one, p0, s_k) -> float:
    v, b = seq[r]
    if r < k:
        if p0 <= 0:
            return 0.0
        return b / p0 * min(v / p0, 1.0)
    if not case_one and r == k:
        return 1.0 / PHI - s_k / (PHI * PHI * v)
    return 0.0


def allocate_public(instance: Instance) -> tuple[tuple[float, ...], AllocationRegime]:
    _check_public(instance)
    order = sorted(range(instance.n), key=lambda i: (-instance.agents[i].rate, i))
    seq = [(instance.agents[i].rate, instance.agents[i].budget) for i in order]
    k, case_one, p0, s_k = _regime(seq)
    x = [0.0] * instance.n
    for r, i in enumerate(order):
        x[i] = _position_alloc(seq, r, k, case_one, p0, s_k)
    return tuple(x), AllocationRegime(k, "I" if case_one else "II", p0, tuple(order))


class _ReportCurve:
    """Allocation of one agent as a function of its report, others fixed."""

    def __init__(self, instance: Instance, i: int):
        _check_public(instance)
        if not 0 <= i < instance.n:
            raise DomainError(f"agent index {i} out of range")
        self.i = i
        self.budget = instance.agents[i].budget
        others = [j for j in range(instance.n) if j != i]
        others.sort(key=lambda j: (-instance.agents[j].rate, j))
        self.others = [(instance.agents[j].rate, instance.agents[j].budget) for j in others]
        self.keys = [(-instance.agents[j].rate, j) for j in others]

    def _seq(self, u: float) -> tuple[list[tuple[float, float]], int]:
        r = bisect.bisect_left(self.keys, (-u, self.i))
        return self.others[:r] + [(u, self.budget)] + self.others[r:], r

    def __call__(self, u: float) -> float:
        seq, r = self._seq(u)
        return _position_alloc(seq, r, *_regime(seq))

    def label(self, u: float):
        seq, r = self._seq(u)
        k, case_one, p0, s_k = _regime(seq)
        return (r, k, case_one) + _position_form(seq, r, k, case_one, p0, s_k)

    def candidates(self, hi: float) -> list[float]:
        """Superset of report values at which the allocation form can change."""
        rates = [v for v, _ in self.others]
        out = set(rates)
        out.update(PHI * v for v in rates)
        n_others = len(self.others)
        for r in range(n_others + 1):
            upper = rates[r - 1] if r > 0 else math.inf
            lower = rates[r] if r < n_others else 0.0
            seq = self.others[:r] + [(0.0, self.budget)] + self.others[r:]
            s = 0.0
            sums = [0.0]
            for _, b in seq:
                s += b
                sums.append(s)
            for s in sums:
                for c in (s / PHI, s):
                    if lower <= c <= upper:
                        out.add(c)
        return sorted(c for c in out if 0.0 < c < hi)


def _pieces_on(curve: _ReportCurve, lo: float, hi: float, depth: int = 0) -> list[RegimePiece]:
    width = hi - lo
    mid_label = curve.label(lo + width / 2)
    samples = (lo + (j + 0.5) * width / STRATIFIED_SAMPLES for j in range(STRATIFIED_SAMPLES))
    if depth >= MAX_BISECT_DEPTH or all(curve.label(u) == mid_label for u in samples):
        return [RegimePiece(lo, hi, mid_label[3], mid_label[4])]
    mid = lo + width / 2
    return _pieces_on(curve, lo, mid, depth + 1) + _pieces_on(curve, mid, hi, depth + 1)


def _merge(pieces: list[RegimePiece]) -> list[RegimePiece]:
    out: list[RegimePiece] = []
    for p in pieces:
        if out and out[-1].form == p.form and out[-1].coeffs == p.coeffs:
            out[-1] = RegimePiece(out[-1].lo, p.hi, p.form, p.coeffs)
        else:
            out.append(p)
    return out


def myerson_pieces(instance: Instance, i: int, upper: float | None = None) -> list[RegimePiece]:
    """Closed-form pieces of u -> x_i(u, v_-i) partitioning (0, upper].

    ``upper`` defaults to the agent's own rate.
    """
    curve = _ReportCurve(instance, i)
    hi = instance.agents[i].rate if upper is None else upper
    if hi <= 0:
        return []
    bounds = [0.0] + curve.candidates(hi) + [hi]
    pieces: list[RegimePiece] = []
    for lo, up in zip(bounds, bounds[1:]):
        if up > lo:
            pieces.extend(_pieces_on(curve, lo, up))
    return _merge(pieces)


def integrate_pieces(pieces: list[RegimePiece], upper: float) -> float:
    return math.fsum(p.integral(p.lo, min(p.hi, upper)) for p in pieces if p.lo < upper)


class PaymentRule:
    """Myerson payments of one agent for any report up to ``upper``.

    The pieces depend only on the other agents, so one decomposition serves
    every report of agent i.
    """

    def __init__(self, instance: Instance, i: int, upper: float):
        self.curve = _ReportCurve(instance, i)
        self.pieces = myerson_pieces(instance, i, upper)
        self.upper = upper

    def allocation(self, report: float) -> float:
        return self.curve(report)

    def payment(self, report: float) -> float:
        if report > self.upper:
            raise DomainError("report above the decomposed range")
        x = self.curve(report)
        if x == 0.0:
            return 0.0
        return report * x - integrate_pieces(self.pieces, report)


def pay_public(instance: Instance) -> Outcome:
    """Run the auction: allocations plus Myerson payments."""
    x, _ = allocate_public(instance)
    payments = []
    for i, a in enumerate(instance.agents):
        if x[i] == 0.0:
            payments.append(0.0)
            continue
        pieces = myerson_pieces(instance, i)
        payments.append(a.rate * x[i] - integrate_pieces(pieces, a.rate))
    return Outcome(x, tuple(payments))


def allocation_curve(instance: Instance, i: int) -> Callable[[float], float]:
    """u -> x_i(u, v_-i) evaluated directly by the allocation rule."""
    return _ReportCurve(instance, i)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                     initial: int = 16, min_width: float = 1e-13) -> float:
    """Adaptive Simpson quadrature tolerant of jump discontinuities.

    Intervals narrower than ``min_width * (b - a)`` are accepted as is, which
    bounds the damage of a jump by its height times that width.
    """
    if b <= a:
        return 0.0
    total_width = b - a
    floor = min_width * total_width
    parts = []
    stack = []
    h = total_width / initial
    for j in range(initial):
        lo = a + j * h
        hi = b if j == initial - 1 else lo + h
        mid = (lo + hi) / 2
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        stack.append((lo, hi, flo, fmid, fhi, (hi - lo) / 6 * (flo + 4 * fmid + fhi)))
    while stack:
        lo, hi, flo, fmid, fhi, whole = stack.pop()
        mid = (lo + hi) / 2
        lm, rm = (lo + mid) / 2, (mid + hi) / 2
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        err = left + right - whole
        if abs(err) <= 15 * tol * (hi - lo) / total_width or hi - lo <= floor:
            parts.append(left + right + err / 15)
        else:
            stack.append((lo, mid, flo, flm, fmid, left))
            stack.append((mid, hi, fmid, frm, fhi, right))
    return math.fsum(parts)


def quadrature_payment(instance: Instance, i: int, tol: float = 1e-10) -> float:
    """Myerson payment of agent i by numeric integration of the raw rule."""
    f = _ReportCurve(instance, i)
    v = instance.agents[i].rate
    x = f(v)
    if x == 0.0:
        return 0.0
    return v * x - adaptive_simpson(f, 0.0, v, tol=tol)
