import csv
import io
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kstate.automata import constant_predictor, cyclic_predictor, decode, predictor_count, run
from kstate.complexity import (
    CSV_HEADER,
    BudgetExceeded,
    asymptotic_error,
    best_k_state,
    near_cyclic_predictor,
    profile,
    witness_point,
)

F = Fraction


def long_run_rate(p, pattern):
    """Errors per symbol over a window long enough to be whole cycles, after any transient."""
    n, k = len(pattern), p.k
    window = n * math.lcm(*range(1, k + 1))
    seq = pattern * (k + 1) + pattern * (window // n)
    trace = run(p, seq)
    tail = trace.steps[len(pattern) * (k + 1):]
    return F(sum(s.loss for s in tail), window)


def scalar_best(pattern, k, a):
    rates = [asymptotic_error(decode(i, k, a), pattern)[0] for i in range(predictor_count(k, a))]
    best = min(rates)
    return best, rates.index(best)


def test_cyclic_rate_zero():
    assert asymptotic_error(cyclic_predictor([0, 1, 2], 3), [0, 1, 2]) == (0, 0)


def test_constant_most_frequent():
    assert asymptotic_error(constant_predictor(0, 2), [0, 0, 1])[0] == F(1, 3)


def test_period_one_match():
    for i in range(0, predictor_count(2, 2), 7):
        p = decode(i, 2, 2)
        if all(x == 0 for x in p.predictions):
            rate, transient = asymptotic_error(p, [0])
            assert rate == 0 and transient <= p.k


def test_empty_pattern_rejected():
    with pytest.raises(ValueError):
        asymptotic_error(constant_predictor(0, 2), [])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(0, 1), min_size=1, max_size=5), st.data())
def test_rate_matches_long_run(k, pattern, data):
    p = decode(data.draw(st.integers(0, predictor_count(k, 2) - 1)), k, 2)
    assert asymptotic_error(p, pattern)[0] == long_run_rate(p, pattern)


@pytest.mark.parametrize("pattern, k, a", [
    ([0, 0, 1], 1, 2), ([0, 0, 1], 2, 2), ([0, 1], 2, 2), ([0, 1, 1, 0], 2, 2),
    ([0, 1, 2], 2, 3), ([0, 0, 1], 3, 2), ([0, 1, 0, 0, 1], 3, 2),
])
def test_search_matches_scalar_enumeration(pattern, k, a):
    best, index = scalar_best(pattern, k, a)
    point = best_k_state(pattern, k, a)
    assert (point.rate, point.witness) == (best, index)


def test_known_points():
    assert best_k_state([0, 1, 2], 3).rate == 0
    assert best_k_state([0], 1).rate == 0
    assert best_k_state([0, 0, 1], 2).rate == F(1, 3)


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        best_k_state([0, 1, 2, 0], 4)


def test_chunked_search_parallel_same_witness():
    import kstate.complexity as cx

    old = cx.CHUNK
    cx.CHUNK = 2000
    try:
        serial = best_k_state([0, 1, 1, 0, 1], 3, 2)
        parallel = best_k_state([0, 1, 1, 0, 1], 3, 2, workers=2)
    finally:
        cx.CHUNK = old
    assert serial == parallel == best_k_state([0, 1, 1, 0, 1], 3, 2)


@pytest.mark.parametrize("pattern", [[0, 1, 2, 0, 1], [0, 0, 1, 2], [1, 0], [0, 1, 1, 1, 2, 2]])
def test_near_cyclic_one_error(pattern):
    p = near_cyclic_predictor(pattern, 3)
    assert p.k == len(pattern) - 1
    assert asymptotic_error(p, pattern)[0] == F(1, len(pattern))


def test_witness_k_ge_n():
    point = witness_point([0, 1, 2, 2, 1], 6)
    assert point.rate == 0 and point.exact


def test_profile_anchor_curve():
    curve = profile([0, 0, 1], 3)
    assert curve.rates() == [F(1, 3), F(1, 3), 0]
    assert curve.is_monotone()


def test_profile_flat_for_period_one():
    assert profile([1], 3, alphabet=2).rates() == [0, 0, 0]


def test_profile_two_cycle():
    assert profile([0, 1], 2).rates()[-1] == 0


def test_profile_falls_back_to_witness():
    curve = profile([0, 1, 2, 1], 4)
    assert curve.points[-1].method == "witness"
    assert curve.points[-1].rate == 0 and curve.points[-1].exact


def test_csv_schema():
    text = profile([0, 0, 1], 2).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_HEADER
    assert rows[1][:4] == ["3", "1", "1", "3"]
    assert text.endswith("\n") and "\r" not in text
