import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liqauction.harness import GeneratorSpec, generate_instance
from liqauction.model import DomainError, Outcome, liquid_value
from liqauction.public import PHI
from liqauction.welfare import (
    SubsetOpt,
    exact_opt_agents,
    grid_error_bound,
    opt_dp,
    opt_exact,
    opt_linear_greedy,
    opt_upper_bound,
    revenue,
    welfare,
)

from conftest import linear_instance, pwl_agent
from liqauction.model import Instance


def brute_opt(instance, m):
    """Enumerate all but the last agent on a grid; the last takes what is left."""
    n = instance.n
    best = 0.0
    for head in itertools.product(range(m + 1), repeat=n - 1):
        used = sum(head)
        if used > m:
            continue
        xs = [h / m for h in head] + [1.0 - used / m]
        best = max(best, sum(liquid_value(a, x) for a, x in zip(instance.agents, xs)))
    return best


def test_welfare_examples():
    inst = linear_instance([2, 1], [1, 1])
    assert welfare(inst, Outcome((0.5, 0.5), (0, 0))) == 1.5
    assert welfare(inst, Outcome.empty(2)) == 0.0
    with pytest.raises(DomainError):
        welfare(inst, Outcome.empty(3))


def test_welfare_example1_optimum():
    eps = 0.1
    inst = linear_instance([1, 1 / PHI], [eps, 1 - eps])
    res = opt_linear_greedy(inst)
    assert res.allocation == pytest.approx((0.1, 0.9))
    assert welfare(inst, Outcome(res.allocation, (0, 0))) == pytest.approx(eps + (1 - eps) / PHI, abs=1e-12)
    assert res.value == pytest.approx(0.656231, abs=1e-6)


def test_greedy_examples():
    res = opt_linear_greedy(linear_instance([2, 1], [1, 1]))
    assert res.allocation == (0.5, 0.5) and res.value == 1.5 and res.method == "greedy-linear"
    assert brute_opt(linear_instance([2, 1], [1, 1]), 10_000) == pytest.approx(1.5, abs=1e-12)
    res = opt_linear_greedy(linear_instance([1], [5]))
    assert res.allocation == (1.0,) and res.value == 1.0


def test_greedy_rejects_pwl_and_handles_zero_rates():
    inst = Instance((pwl_agent([(0, 0), (1, 1)], 1),), "private")
    with pytest.raises(DomainError):
        opt_linear_greedy(inst)
    res = opt_linear_greedy(linear_instance([0, 3], [1, 1]))
    assert res.allocation == (0.0, 1 / 3)


@pytest.mark.parametrize("seed", range(30))
def test_greedy_against_brute_force(seed):
    inst = generate_instance(GeneratorSpec(1 + seed % 3, value_range=(0.1, 10), budget_range=(0.1, 10)), seed)
    m = 400 if inst.n == 3 else 4000
    brute = brute_opt(inst, m)
    g = opt_linear_greedy(inst).value
    assert g >= brute - 1e-12
    assert g - brute <= grid_error_bound(inst, m) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 100), st.floats(0.01, 100)), min_size=2, max_size=8))
def test_upper_bound_soundness(pairs):
    inst = linear_instance(*zip(*pairs))
    g = opt_linear_greedy(inst).value
    for j in range(1, inst.n):
        assert g <= opt_upper_bound(inst, j) + 1e-9 * max(1.0, g)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=1, max_size=8))
def test_greedy_exhausts_supply_or_caps(pairs):
    inst = linear_instance(*zip(*pairs))
    res = opt_linear_greedy(inst)
    assert math.fsum(res.allocation) <= 1 + 1e-12
    saturated = all(x == a.budget / a.rate for a, x in zip(inst.agents, res.allocation) if a.rate > 0)
    assert math.isclose(math.fsum(res.allocation), 1.0, abs_tol=1e-12) or saturated
    recomputed = math.fsum(liquid_value(a, x) for a, x in zip(inst.agents, res.allocation))
    assert abs(recomputed - res.value) <= 1e-9


def test_upper_bound_examples():
    assert opt_upper_bound(linear_instance([2, 1], [1, 1]), 1) == 1.5
    assert opt_upper_bound(linear_instance([1, 1 / PHI], [0.1, 0.9]), 1) == pytest.approx(0.656231, abs=1e-6)
    assert opt_upper_bound(linear_instance([1, 1], [2, 1]), 1) == 1.0
    assert opt_linear_greedy(linear_instance([1, 1], [2, 1])).value == 1.0


def test_upper_bound_errors():
    with pytest.raises(DomainError):
        opt_upper_bound(linear_instance([2, 1], [1, 1]), 2)
    with pytest.raises(DomainError):
        opt_upper_bound(linear_instance([2, 1], [1, 1]), 0)
    with pytest.raises(DomainError):
        opt_upper_bound(linear_instance([0, 0, 0], [1, 1, 1]), 1)
    # zero next rate drops the second term
    assert opt_upper_bound(linear_instance([2, 0], [1, 1]), 1) == 1.0


def test_revenue():
    assert revenue(Outcome((0, 0), (0.3, 0.2))) == 0.5
    assert revenue(Outcome.empty(4)) == 0.0


def test_dp_examples():
    res = opt_dp(linear_instance([2, 1], [1, 1]), 1000)
    assert 1.5 - 0.004 <= res.value <= 1.5
    assert res.method == "dp-grid" and res.exact
    inst = Instance((pwl_agent([(0, 0), (1, 10)], 3),), "private")
    for m in (1, 7, 100):
        assert opt_dp(inst, m).value == 3.0
    two = Instance((pwl_agent([(0, 0), (0.5, 4), (1, 4)], 4),) * 2, "private")
    res = opt_dp(two, 2)
    assert res.allocation == (0.5, 0.5) and res.value == 8.0
    with pytest.raises(DomainError):
        opt_dp(two, 0)


def test_dp_unaligned_grid_reports_approximate():
    inst = linear_instance([math.pi, 1.0], [1.0, 1.0])
    res = opt_dp(inst, 50)
    assert not res.exact and res.grid_resolution == 50
    g = opt_linear_greedy(inst).value
    assert 0 <= g - res.value <= grid_error_bound(inst, 50)


@pytest.mark.parametrize("seed", range(12))
def test_dp_matches_greedy_on_linear(seed):
    inst = generate_instance(GeneratorSpec(1 + seed % 6), seed)
    m = 10_000 if seed < 3 else 1000
    res = opt_dp(inst, m)
    g = opt_linear_greedy(inst).value
    assert res.value <= g + 1e-9
    assert g - res.value <= grid_error_bound(inst, res.grid_resolution) + 1e-9
    if inst.n <= 2:
        assert g - res.value <= 2 * max(inst.rates) / res.grid_resolution + 1e-9
    assert math.fsum(res.allocation) <= 1 + 1e-12
    assert abs(res.value - math.fsum(liquid_value(a, x) for a, x in zip(inst.agents, res.allocation))) <= 1e-9


@pytest.mark.parametrize("seed", range(40))
def test_exact_matches_greedy_on_linear(seed):
    inst = generate_instance(GeneratorSpec(1 + seed % 9), seed)
    assert opt_exact(inst).value == pytest.approx(opt_linear_greedy(inst).value, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_exact_dominates_dp_and_random_allocations(seed):
    inst = generate_instance(GeneratorSpec(1 + seed % 5, "pwl", k=3), seed)
    ex = opt_exact(inst)
    assert math.fsum(ex.allocation) <= 1 + 1e-12
    dp = opt_dp(inst, 500)
    assert dp.value <= ex.value + 1e-9
    assert ex.value - dp.value <= grid_error_bound(inst, 500) + 1e-9
    rng = np.random.default_rng(seed)
    for w in rng.dirichlet(np.ones(inst.n), size=300):
        assert sum(liquid_value(a, float(x)) for a, x in zip(inst.agents, w)) <= ex.value + 1e-9
    if inst.n <= 2:
        assert ex.value >= brute_opt(inst, 20_000) - 1e-12


def test_subset_opt_matches_direct():
    inst = generate_instance(GeneratorSpec(6, "mixed", regime="private"), 11)
    sub = SubsetOpt(inst.agents)
    for mask in range(1 << inst.n):
        members = [i for i in range(inst.n) if mask >> i & 1]
        direct = exact_opt_agents([inst.agents[i] for i in members])[0]
        assert sub.value(mask) == pytest.approx(direct, rel=1e-12, abs=1e-12)
    assert sub.of([]) == 0.0
