from fractions import Fraction
from pathlib import Path

import pytest

from kstate.automata import FiniteStatePredictor

GOLDEN = Path(__file__).parent / "golden"

# example four-state predictor over three symbols; rows a1..a3, columns s1..s4
FIG1_TABLE = (
    (1, 1, 0, 3),
    (2, 3, 0, 2),
    (3, 0, 3, 1),
)


@pytest.fixture
def fig1():
    return FiniteStatePredictor(FIG1_TABLE, (0, 1, 2, 0), 0)


@pytest.fixture
def golden_dir():
    return GOLDEN


def frac_list(*xs):
    return [Fraction(x) for x in xs]


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py" in rep.nodeid:
                lines.append((rep.nodeid.split("::", 1)[1], outcome.upper()))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(lines):
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}")
