import pytest

from liqauction.model import Agent, Instance, ValuationCurve

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} {detail}".rstrip())
        print(_ACCEPTANCE_LINES[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


def linear_instance(rates, budgets, regime="public"):
    return Instance(tuple(Agent.linear(v, b) for v, b in zip(rates, budgets)), regime)


def pwl_agent(points, budget):
    return Agent(float(budget), ValuationCurve.pwl(points))
