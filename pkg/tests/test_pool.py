import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kstate.automata import constant_predictor, decode, predict, predictor_count, run, step
from kstate.pool import (
    EmptyPoolError,
    WeightedPool,
    best_expert_loss,
    mistake_bound,
    run_aggregator,
)


def scalar_pool_masses(k, a, lam, sequence):
    """Slow reference: every predictor decoded, weights kept as Fractions and renormalized."""
    members = [decode(i, k, a) for i in range(predictor_count(k, a))]
    weights = [Fraction(1, len(members))] * len(members)
    history = []
    for symbol in list(sequence) + [None]:
        mass = [Fraction(0)] * a
        for m, w in zip(members, weights):
            mass[predict(m)] += w
        history.append(mass)
        if symbol is None:
            break
        weights = [w * lam if predict(m) == symbol else w for m, w in zip(members, weights)]
        total = sum(weights)
        weights = [w / total for w in weights]
        members = [step(m, symbol) for m in members]
    return history


def two_members(preds, weights, lam=2):
    members = [constant_predictor(p, 2) for p in preds]
    return WeightedPool.from_members(members, lam=lam, initial_weights=weights)


def test_tie_goes_to_lowest_symbol():
    guess, mass = two_members([0, 1], [Fraction(1, 2), Fraction(1, 2)]).aggregate_predict()
    assert guess == 0
    assert mass == [Fraction(1, 2), Fraction(1, 2)]


def test_strict_majority():
    guess, _ = two_members([1, 0], [Fraction(3, 4), Fraction(1, 4)]).aggregate_predict()
    assert guess == 1


def test_full_pool_uniform_at_start():
    guess, mass = WeightedPool.full(2, 2, 2).aggregate_predict()
    assert mass == [Fraction(1, 2), Fraction(1, 2)]
    assert guess == 0


def test_empty_pool_rejected():
    with pytest.raises(EmptyPoolError):
        WeightedPool.from_members([])


def test_observe_reward_and_normalize():
    pool = two_members([0, 1], [Fraction(1, 2), Fraction(1, 2)], lam=2)
    pool.observe(0)
    assert pool.weights() == [Fraction(2, 3), Fraction(1, 3)]
    assert sum(pool.weights()) == 1


def test_lambda_one_is_identity():
    pool = two_members([0, 1], [Fraction(1, 4), Fraction(3, 4)], lam=1)
    pool.observe(0)
    assert pool.weights() == [Fraction(1, 4), Fraction(3, 4)]


def test_observe_rejects_bad_symbol():
    with pytest.raises(ValueError):
        WeightedPool.full(2, 2).observe(2)


def test_after_one_observation_matches_scalar_reference():
    pool = WeightedPool.full(2, 2, 2)
    pool.observe(0)
    expected = scalar_pool_masses(2, 2, Fraction(2), [0])[1]
    assert expected == [Fraction(7, 12), Fraction(5, 12)]
    assert pool.masses() == expected


@pytest.mark.parametrize("seq", [[0, 1, 1, 0], [1, 1, 1], [0, 1, 0, 1, 1, 0, 0]])
@pytest.mark.parametrize("lam", [Fraction(3, 2), Fraction(4)])
def test_masses_match_scalar_reference(seq, lam):
    pool = WeightedPool.full(2, 2, lam)
    result = run_aggregator(pool, seq)
    reference = scalar_pool_masses(2, 2, lam, seq)
    assert result.masses == reference[:-1]
    assert pool.masses() == reference[-1]


def test_masses_match_scalar_reference_three_symbols():
    seq = [2, 0, 1, 1]
    pool = WeightedPool.full(2, 3, Fraction(3, 2))
    assert run_aggregator(pool, seq).masses == scalar_pool_masses(2, 3, Fraction(3, 2), seq)[:-1]


def test_run_aggregator_empty():
    result = run_aggregator(WeightedPool.full(2, 2), [])
    assert result.trace.steps == [] and result.trace.cumulative_loss == 0


def test_run_aggregator_single_constant_expert():
    pool = WeightedPool.from_members([constant_predictor(0, 2)])
    assert run_aggregator(pool, [0, 0, 0]).trace.cumulative_loss == 0


def test_weight_snapshots_normalized():
    pool = WeightedPool.full(2, 2, Fraction(3, 2))
    result = run_aggregator(pool, [0, 1, 1], record_weights=True)
    assert len(result.weight_snapshots) == 4
    for snap in result.weight_snapshots:
        assert sum(snap) == 1
        assert all(w > 0 for w in snap)


def test_best_expert_loss_matches_scalar_search():
    rng = random.Random(5)
    for _ in range(5):
        seq = [rng.randrange(2) for _ in range(12)]
        losses = [run(decode(i, 2, 2), seq).cumulative_loss for i in range(128)]
        best = min(losses)
        assert best_expert_loss(2, 2, seq) == (best, losses.index(best))


def test_alternating_sequence_within_bound():
    seq = [0, 1] * 10
    pool = WeightedPool.full(2, 2, 2)
    mistakes = run_aggregator(pool, seq).trace.cumulative_loss
    best, _ = best_expert_loss(2, 2, seq)
    assert best == 0
    assert mistakes <= mistake_bound(128, best, 2).bound


# -- mistake bound ------------------------------------------------------------------------------


def test_bound_single_expert_zero_loss():
    assert mistake_bound(1, 0, 2).bound == 0


def test_bound_closed_form():
    b = mistake_bound(128, 0, 2)
    assert b.bound == pytest.approx(math.log(128) / math.log(4 / 3), rel=1e-12)
    assert b.bound == pytest.approx(16.8659, abs=1e-4)
    assert b.c1 == pytest.approx(0.693147 / 0.287682, rel=1e-5)
    assert b.c1 == pytest.approx(2.4094, abs=1e-4)
    assert b.c2 == pytest.approx(1 / math.log(4 / 3))


@pytest.mark.parametrize("lam", [1, Fraction(1, 2), 0])
def test_bound_rejects_small_lambda(lam):
    with pytest.raises(ValueError):
        mistake_bound(10, 0, lam)


def test_bound_over_random_sequences():
    rng = random.Random(2024)
    for lam in (Fraction(3, 2), Fraction(2), Fraction(4)):
        for _ in range(35):
            seq = [rng.randrange(2) for _ in range(30)]
            mistakes = run_aggregator(WeightedPool.full(2, 2, lam), seq).trace.cumulative_loss
            best, _ = best_expert_loss(2, 2, seq)
            assert mistakes <= mistake_bound(128, best, lam).bound


# -- invariants ---------------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=15), st.sampled_from([Fraction(3, 2), Fraction(2), Fraction(5, 3)]))
def test_normalization_after_every_observe(seq, lam):
    pool = WeightedPool.full(2, 2, lam)
    for s in seq:
        pool.observe(s)
        w = pool.weights()
        assert sum(w) == 1 and all(x > 0 for x in w)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=12), st.integers(2, 9))
def test_scale_invariance(seq, scale):
    rng = random.Random(len(seq))
    members = [decode(rng.randrange(128), 2, 2) for _ in range(9)]
    base = [Fraction(rng.randint(1, 5), rng.randint(1, 5)) for _ in members]
    a = WeightedPool.from_members(members, 2, initial_weights=base)
    b = WeightedPool.from_members(members, 2, initial_weights=[w * scale for w in base])
    assert run_aggregator(a, seq).trace == run_aggregator(b, seq).trace


def test_float_mode_agrees_with_exact():
    rng = random.Random(99)
    gap = Fraction(1, 2**40)
    for _ in range(20):
        seq = [rng.randrange(2) for _ in range(40)]
        exact = WeightedPool.full(2, 2, Fraction(3, 2))
        flt = WeightedPool.full(2, 2, 1.5, mode="float")
        for s in seq:
            ge, me = exact.aggregate_predict()
            gf, mf = flt.aggregate_predict()
            assert sum(mf) == pytest.approx(1.0, abs=2**-40)
            if ge != gf:
                assert abs(me[0] - me[1]) / max(me) < gap
            for x, y in zip(me, mf):
                assert float(x) == pytest.approx(y, rel=1e-9)
            exact.observe(s)
            flt.observe(s)


def test_state_prediction_masses_sum_to_one():
    pool = WeightedPool.full(2, 2, 2)
    for s in [0, 1, 1]:
        pool.observe(s)
    table = pool.state_prediction_masses()
    assert sum(sum(r) for r in table) == 1
    assert [sum(col) for col in zip(*table)] == pool.masses()
