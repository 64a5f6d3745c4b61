import json
from fractions import Fraction

import pytest

from kstate.equivalence import (
    ARGMAX_MATCH,
    DIVERGED,
    EXACT_MATCH,
    ComparisonConfig,
    GuardError,
    compare,
    summary_json,
    sweep,
)
from kstate.network import init_uniform, normalized_scores, observe
from kstate.pool import WeightedPool

F = Fraction


@pytest.mark.parametrize("k, a, lam", [(2, 2, F(2)), (3, 2, F(3, 2)), (2, 1, F(2))])
def test_t0_uniform_and_agree(k, a, lam):
    report = compare(ComparisonConfig(k, a, lam, []))
    (rec,) = report.records
    assert rec.oracle == rec.network == [F(1, a)] * a
    assert rec.oracle_pred == rec.net_pred == 0
    assert report.verdict == EXACT_MATCH


def test_one_step_recorded_not_assumed():
    report = compare(ComparisonConfig(2, 2, F(2), [0]))
    assert len(report.records) == 2
    step1 = report.records[1]
    assert step1.symbol is None
    # independent routes for each side
    pool = WeightedPool.full(2, 2, 2).observe(0)
    net = observe(init_uniform(2, 2, F(2)), 0)
    assert step1.oracle == pool.masses() == [F(7, 12), F(5, 12)]
    assert step1.network == normalized_scores(net) == [F(2, 3), F(1, 3)]
    assert step1.exact is False
    assert step1.agree is True
    assert report.first_mass_mismatch == 1
    assert report.first_divergence is None
    assert report.verdict == ARGMAX_MATCH
    assert report.max_normalized_gap == F(1, 12)


def test_report_masses_are_simplex():
    report = compare(ComparisonConfig(2, 2, F(3, 2), [0, 1, 1, 0, 1]))
    for r in report.records:
        assert sum(r.oracle) == 1 and sum(r.network) == 1


def test_divergence_dump_present():
    report = compare(ComparisonConfig(2, 2, F(2), [0, 0, 0, 0, 0, 1, 1, 1]))
    assert report.verdict == DIVERGED
    t = report.first_divergence
    dump = report.dumps["first_divergence"]
    assert dump["t"] == t
    table = [[Fraction(x) for x in row] for row in dump["pool_state_prediction_mass"]]
    assert [sum(col) for col in zip(*table)] == report.records[t].oracle
    assert set(dump["network"]) == {"steps", "w_active", "w_trans"}


def test_json_schema_and_round_trip():
    report = compare(ComparisonConfig(2, 2, F(2), [0, 1]))
    text = report.to_json()
    data = json.loads(text)
    for key in ("k", "alphabet", "lambda", "sequence", "steps", "first_divergence", "verdict"):
        assert key in data
    assert data["lambda"] == "2/1"
    assert data["sequence"] == [1, 2]
    step = data["steps"][0]
    assert set(step) >= {"t", "in", "oracle", "network", "oracle_pred", "net_pred", "agree"}
    assert [Fraction(x) for x in step["oracle"]] == report.records[0].oracle
    assert report.to_json() == text


@pytest.mark.parametrize("kwargs", [
    dict(k=2, alphabet=3, lam=F(2), sequence=[]),
    dict(k=2, alphabet=2, lam=F(1), sequence=[]),
    dict(k=2, alphabet=2, lam=F(2), sequence=[2]),
    dict(k=4, alphabet=3, lam=F(2), sequence=[]),
])
def test_config_guards(kwargs):
    with pytest.raises(GuardError):
        ComparisonConfig(**kwargs)


def test_sweep_zero_length():
    s = sweep(2, 2, 2, 0)
    assert s["sequences"] == 1
    assert s["total_steps"] == 0


def test_sweep_budget():
    with pytest.raises(GuardError):
        sweep(2, 2, 2, 8, op_budget=1000)


def test_sweep_deterministic_and_golden(golden_dir):
    a = summary_json(sweep(2, 2, 2, 8))
    b = summary_json(sweep(2, 2, 2, 8))
    assert a == b
    golden = json.loads((golden_dir / "sweep_k2_a2_lambda2_len8.json").read_text())
    golden.pop("config")
    assert json.loads(a) == golden


def test_sweep_parallel_matches_serial():
    assert sweep(2, 2, 2, 4, workers=2) == sweep(2, 2, 2, 4)


def test_sweep_lexicographic_order():
    reports = sweep(2, 2, 2, 3)["reports"]
    assert [r["sequence"] for r in reports][:3] == ["a1a1a1", "a1a1a2", "a1a2a1"]
    assert len(reports) == 8


def test_float_mode_never_claims_exact():
    report = compare(ComparisonConfig(2, 2, 2.0, [], mode="float"))
    assert report.verdict == ARGMAX_MATCH
