"""Side-by-side runs of the full weighted-majority pool and the reduced network.

The pool over every K-state predictor is the oracle.  At each time step both
systems' per-symbol vectors are normalized to the simplex and compared, both
exactly and by argmax (lowest index wins ties).  Whether the two agree past
the first observation is measured here, never assumed.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from ._text import format_rational, format_sequence
from .automata import predictor_count
from .network import init_uniform, normalized_scores, observe as network_observe
from .pool import EXACT, MAX_POOL_MEMBERS, WeightedPool, argmax_lowest

EXACT_MATCH = "exact-match"
ARGMAX_MATCH = "argmax-match"
DIVERGED = "diverged"

DEFAULT_OP_BUDGET = 10**9


class GuardError(ValueError):
    """A configured size or work guard would be exceeded."""


@dataclass
class ComparisonConfig:
    k: int
    alphabet: int
    lam: Fraction
    sequence: List[int]
    mode: str = EXACT
    source: str = "explicit"

    def __post_init__(self):
        self.lam = Fraction(self.lam) if self.mode == EXACT else self.lam
        if not 1 <= self.alphabet <= self.k:
            raise GuardError(f"comparison needs 1 <= |A| <= K, got |A|={self.alphabet}, K={self.k}")
        if not Fraction(self.lam) > 1:
            raise GuardError(f"lambda must exceed 1, got {self.lam}")
        n = predictor_count(self.k, self.alphabet)
        if n > MAX_POOL_MEMBERS:
            raise GuardError(f"{n} predictors exceed the oracle guard of {MAX_POOL_MEMBERS}")
        bad = [s for s in self.sequence if not 0 <= s < self.alphabet]
        if bad:
            raise GuardError(f"sequence symbols {bad} outside alphabet of size {self.alphabet}")


@dataclass
class StepRecord:
    t: int
    symbol: Optional[int]
    oracle: list
    network: list
    oracle_pred: int
    net_pred: int

    @property
    def agree(self) -> bool:
        return self.oracle_pred == self.net_pred

    @property
    def exact(self) -> bool:
        return self.oracle == self.network


@dataclass
class EquivalenceReport:
    k: int
    alphabet: int
    lam: object
    sequence: List[int]
    mode: str
    records: List[StepRecord] = field(default_factory=list)
    dumps: Dict[str, dict] = field(default_factory=dict)

    @property
    def first_divergence(self) -> Optional[int]:
        return next((r.t for r in self.records if not r.agree), None)

    @property
    def first_mass_mismatch(self) -> Optional[int]:
        return next((r.t for r in self.records if not r.exact), None)

    @property
    def max_normalized_gap(self):
        gap = Fraction(0) if self.mode == EXACT else 0.0
        for r in self.records:
            for x, y in zip(r.oracle, r.network):
                gap = max(gap, abs(x - y))
        return gap

    @property
    def verdict(self) -> str:
        if self.first_divergence is not None:
            return DIVERGED
        if self.mode == EXACT and self.first_mass_mismatch is None:
            return EXACT_MATCH
        return ARGMAX_MATCH

    def to_dict(self) -> dict:
        exact = self.mode == EXACT
        fmt = format_rational if exact else float
        return {
            "k": self.k,
            "alphabet": self.alphabet,
            "lambda": format_rational(self.lam) if exact else float(self.lam),
            "mode": self.mode,
            "sequence": [s + 1 for s in self.sequence],
            "steps": [
                {
                    "t": r.t,
                    "in": None if r.symbol is None else r.symbol + 1,
                    "oracle": [fmt(x) for x in r.oracle],
                    "network": [fmt(x) for x in r.network],
                    "oracle_pred": r.oracle_pred + 1,
                    "net_pred": r.net_pred + 1,
                    "agree": r.agree,
                    "exact": r.exact,
                }
                for r in self.records
            ],
            "first_divergence": self.first_divergence,
            "first_mass_mismatch": self.first_mass_mismatch,
            "max_normalized_gap": fmt(self.max_normalized_gap),
            "verdict": self.verdict,
            "dumps": self.dumps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _state_dump(t: int, pool: WeightedPool, net, exact: bool) -> dict:
    fmt = format_rational if exact else float
    return {
        "t": t,
        "pool_state_prediction_mass": [[fmt(x) for x in row] for row in pool.state_prediction_masses()],
        "network": net.to_dict(),
    }


def compare(config: ComparisonConfig) -> EquivalenceReport:
    """Run both systems on ``config.sequence`` from uniform weights.

    One record per time t = 0..len(sequence): the vectors each system would
    vote with before seeing ``sequence[t]`` (the last record has no input).
    """
    exact = config.mode == EXACT
    pool = WeightedPool.full(config.k, config.alphabet, config.lam, config.mode)
    net = init_uniform(config.k, config.alphabet, config.lam, config.mode)
    report = EquivalenceReport(config.k, config.alphabet, config.lam, list(config.sequence), config.mode)
    seq = list(config.sequence)
    for t in range(len(seq) + 1):
        oracle = pool.masses()
        scores = normalized_scores(net)
        record = StepRecord(t, seq[t] if t < len(seq) else None, oracle, scores,
                            argmax_lowest(oracle), argmax_lowest(scores))
        report.records.append(record)
        if not record.exact and "first_mass_mismatch" not in report.dumps and exact:
            report.dumps["first_mass_mismatch"] = _state_dump(t, pool, net, exact)
        if not record.agree and "first_divergence" not in report.dumps:
            report.dumps["first_divergence"] = _state_dump(t, pool, net, exact)
        if t < len(seq):
            pool.observe(seq[t])
            net = network_observe(net, seq[t])
    return report


def all_sequences(alphabet: int, length: int):
    """Every sequence of ``length`` symbols, lexicographic."""
    return (list(s) for s in itertools.product(range(alphabet), repeat=length))


def _compare_summary(args) -> dict:
    k, alphabet, lam, seq, mode = args
    report = compare(ComparisonConfig(k, alphabet, lam, seq, mode, "exhaustive"))
    entry = {
        "sequence": format_sequence(seq),
        "steps": len(seq),
        "comparisons": len(report.records),
        "agreements": sum(r.agree for r in report.records),
        "exact_matches": sum(r.exact for r in report.records),
        "verdict": report.verdict,
        "first_divergence": report.first_divergence,
        "first_mass_mismatch": report.first_mass_mismatch,
    }
    if report.first_divergence is not None:
        entry["divergence_dump"] = report.dumps["first_divergence"]
        rec = report.records[report.first_divergence]
        fmt = format_rational if mode == EXACT else float
        entry["divergence_vectors"] = {
            "oracle": [fmt(x) for x in rec.oracle],
            "network": [fmt(x) for x in rec.network],
        }
    return entry


def sweep(k: int, alphabet: int, lam, max_length: int, mode: str = EXACT,
          op_budget: int = DEFAULT_OP_BUDGET, workers: int = 1) -> dict:
    """Compare on every sequence of length ``max_length``.

    Each report also covers every prefix, so this spans all lengths up to
    ``max_length``.  Output order and content do not depend on ``workers``.
    """
    if max_length < 0:
        raise ValueError("max_length must be nonnegative")
    n = predictor_count(k, alphabet)
    work = alphabet**max_length * n * max(max_length, 1)
    if work > op_budget:
        raise GuardError(f"sweep needs ~{work} member-steps, over the budget of {op_budget}")
    lam = Fraction(lam) if mode == EXACT else float(lam)
    jobs = [(k, alphabet, lam, seq, mode) for seq in all_sequences(alphabet, max_length)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            entries = list(ex.map(_compare_summary, jobs, chunksize=16))
    else:
        entries = [_compare_summary(j) for j in jobs]

    verdicts = {EXACT_MATCH: 0, ARGMAX_MATCH: 0, DIVERGED: 0}
    first_div_hist: Dict[str, int] = {}
    first_mismatch_hist: Dict[str, int] = {}
    for e in entries:
        verdicts[e["verdict"]] += 1
        for key, hist in (("first_divergence", first_div_hist), ("first_mass_mismatch", first_mismatch_hist)):
            label = "none" if e[key] is None else str(e[key])
            hist[label] = hist.get(label, 0) + 1
    return {
        "k": k,
        "alphabet": alphabet,
        "lambda": format_rational(lam) if mode == EXACT else float(lam),
        "mode": mode,
        "max_length": max_length,
        "sequences": len(entries),
        "total_steps": sum(e["steps"] for e in entries),
        "total_comparisons": sum(e["comparisons"] for e in entries),
        "argmax_agreements": sum(e["agreements"] for e in entries),
        "exact_matches": sum(e["exact_matches"] for e in entries),
        "verdicts": verdicts,
        "first_divergence_histogram": first_div_hist,
        "first_mass_mismatch_histogram": first_mismatch_hist,
        "reports": entries,
    }


def summary_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=1) + "\n"
