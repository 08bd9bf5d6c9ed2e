import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liqauction.model import (
    Agent,
    DomainError,
    Instance,
    InstanceFormatError,
    Outcome,
    ValuationCurve,
    capped_breakpoints,
    dumps_instance,
    evaluate_valuation,
    liquid_value,
    load_instance,
    loads_instance,
    save_instance,
)

from conftest import linear_instance, pwl_agent


def test_evaluate_linear():
    assert evaluate_valuation(ValuationCurve.linear(2), 0.5) == 1.0


def test_evaluate_pwl_midpoint():
    curve = ValuationCurve.pwl([(0, 0), (0.5, 1), (1, 1)])
    assert evaluate_valuation(curve, 0.25) == 0.5


@pytest.mark.parametrize("curve", [ValuationCurve.linear(3.5), ValuationCurve.pwl([(0, 0), (0.3, 2), (1, 2.5)])])
def test_evaluate_at_zero(curve):
    assert evaluate_valuation(curve, 0.0) == 0.0


@pytest.mark.parametrize("x", [-1e-9, 1.0000001, float("nan")])
def test_evaluate_domain(x):
    with pytest.raises(DomainError):
        evaluate_valuation(ValuationCurve.linear(1), x)


def test_liquid_value_examples():
    assert liquid_value(Agent.linear(2, 1), 1.0) == 1.0
    assert liquid_value(Agent.linear(2, 1), 0.25) == 0.5
    assert liquid_value(pwl_agent([(0, 0), (1, 10)], 3), 0.5) == 3.0


@pytest.mark.parametrize("points", [
    [(0, 0)],
    [(0, 1), (1, 2)],
    [(0, 0), (0.9, 1)],
    [(0, 0), (0.5, 2), (0.5, 3), (1, 3)],
    [(0, 0), (0.5, 2), (1, 1)],
])
def test_pwl_invariants_rejected(points):
    with pytest.raises(DomainError):
        ValuationCurve.pwl(points)


def test_agent_and_instance_invariants():
    with pytest.raises(DomainError):
        Agent.linear(1, -1)
    with pytest.raises(DomainError):
        ValuationCurve.linear(float("inf"))
    with pytest.raises(DomainError):
        Instance((), "public")
    with pytest.raises(DomainError):
        Instance((pwl_agent([(0, 0), (1, 1)], 1),), "public")


curves = st.one_of(
    st.floats(0, 100).map(ValuationCurve.linear),
    st.lists(st.tuples(st.floats(0.01, 0.99), st.floats(0, 10)), min_size=0, max_size=5).map(
        lambda raw: ValuationCurve.pwl(
            [(0.0, 0.0)]
            + [(x, v) for x, v in zip(sorted({round(x, 6) for x, _ in raw}), sorted(v for _, v in raw))]
            + [(1.0, 10.0 + 1)]
        )
    ),
)


@given(curves, st.floats(0, 20), st.floats(0, 1), st.floats(0, 1))
def test_liquid_value_monotone_and_capped(curve, budget, x, y):
    agent = Agent(budget, curve)
    lo, hi = sorted((x, y))
    assert liquid_value(agent, lo) <= liquid_value(agent, hi)
    assert liquid_value(agent, hi) <= budget
    assert liquid_value(agent, 0.0) == 0.0


@given(curves)
def test_evaluate_matches_breakpoints(curve):
    for x, v in curve.breakpoints():
        assert evaluate_valuation(curve, x) == v


def test_capped_breakpoints_contains_crossing():
    pts = capped_breakpoints(Agent.linear(2, 1))
    assert pts == [(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]
    assert capped_breakpoints(Agent.linear(0.5, 1)) == [(0.0, 0.0), (1.0, 0.5)]


def test_json_round_trip(tmp_path):
    inst = Instance((Agent.linear(2.5, 1), pwl_agent([(0, 0), (0.4, 3), (1, 3.5)], 2)), "private")
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    assert load_instance(path) == inst
    doc = json.loads(path.read_text())
    assert doc["agents"][1]["valuation"] == {"kind": "pwl", "points": [[0.0, 0.0], [0.4, 3.0], [1.0, 3.5]]}
    assert loads_instance(dumps_instance(inst)) == inst


@pytest.mark.parametrize("text, where", [
    ("{", "line 1"),
    ('{"regime": "x", "agents": []}', "regime"),
    ('{"regime": "public", "agents": []}', "agents"),
    ('{"regime": "public", "agents": [{"valuation": {"kind": "linear", "rate": 1}}]}', "agents[0].budget"),
    ('{"regime": "public", "agents": [{"budget": "1", "valuation": {"kind": "linear", "rate": 1}}]}',
     "agents[0].budget"),
    ('{"regime": "private", "agents": [{"budget": 1, "valuation": {"kind": "pwl", "points": [[0,0],[0.5]]}}]}',
     "agents[0].valuation.points[1]"),
    ('{"regime": "private", "agents": [{"budget": 1, "valuation": {"kind": "cubic"}}]}',
     "agents[0].valuation.kind"),
    ('{"regime": "public", "agents": [{"budget": 1, "valuation": {"kind": "pwl", "points": [[0,0],[1,1]]}}]}',
     "regime"),
])
def test_malformed_instances_name_the_field(text, where):
    with pytest.raises(InstanceFormatError, match=where.replace("[", r"\[").replace("]", r"\]")):
        loads_instance(text)


def test_outcome_shapes():
    with pytest.raises(DomainError):
        Outcome((0.5,), (0.1, 0.2))
    assert Outcome.empty(3).allocations == (0.0, 0.0, 0.0)
    assert len(linear_instance([1, 2], [1, 1])) == 2
