"""Best achievable error of K-state predictors on periodic input.

On the infinite repetition of a pattern of length n, a predictor's
(active state, phase) pair eventually cycles.  The asymptotic error rate is
the number of mistakes inside that cycle divided by its length; mistakes made
before the cycle is entered are reported separately as transient loss.

``best_k_state`` scans every K-state predictor (vectorized, in index chunks)
and returns the lowest index attaining the minimum rate.  When the predictor
count is over budget only a constructive witness is available, which bounds
the rate from above; points built that way carry ``exact=False``.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .automata import (
    FiniteStatePredictor,
    cyclic_predictor,
    decode,
    decode_range,
    embed,
    encode,
    predictor_count,
    require_int64,
)

MAX_SEARCH_PREDICTORS = 2**23
CHUNK = 2**18

CSV_HEADER = ["period_n", "K", "rate_num", "rate_den", "rate_float", "witness_index", "transient_loss"]


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ComplexityPoint:
    period_n: int
    k: int
    rate: Fraction
    witness: int
    transient_loss: int
    exact: bool = True
    method: str = "exhaustive"

    def csv_row(self) -> list:
        return [self.period_n, self.k, self.rate.numerator, self.rate.denominator,
                repr(float(self.rate)), self.witness, self.transient_loss]


@dataclass
class ComplexityCurve:
    pattern: List[int]
    alphabet: int
    points: List[ComplexityPoint] = field(default_factory=list)

    @property
    def period_n(self) -> int:
        return len(self.pattern)

    def rates(self) -> List[Fraction]:
        return [p.rate for p in self.points]

    def is_monotone(self) -> bool:
        r = self.rates()
        return all(a >= b for a, b in zip(r, r[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for p in self.points:
            writer.writerow(p.csv_row())
        return buf.getvalue()


def _alphabet_for(pattern: Sequence[int], alphabet: Optional[int]) -> int:
    if not pattern:
        raise ValueError("pattern must be non-empty")
    need = max(pattern) + 1
    if alphabet is None:
        return need
    if alphabet < need:
        raise ValueError(f"pattern uses a{need} but the alphabet has {alphabet} symbols")
    return alphabet


def asymptotic_error(p: FiniteStatePredictor, pattern: Sequence[int]) -> Tuple[Fraction, int]:
    """(errors per symbol inside the eventual cycle, errors before entering it).

    Starts at ``p.active_state`` in phase 0 and stops at the first repeated
    (state, phase) pair.
    """
    n = len(pattern)
    if n == 0:
        raise ValueError("pattern must be non-empty")
    seen = {}
    errors = []
    state, phase = p.active_state, 0
    while (state, phase) not in seen:
        seen[(state, phase)] = len(errors)
        symbol = pattern[phase]
        errors.append(int(p.predictions[state] != symbol))
        state = p.transitions[symbol][state]
        phase = (phase + 1) % n
    start = seen[(state, phase)]
    cycle = errors[start:]
    return Fraction(sum(cycle), len(cycle)), sum(errors[:start])


def _chunk_rates(args) -> Tuple[int, int, int]:
    """Best (errors, cycle_periods, index) over one index range; ties keep the lowest index."""
    start, stop, k, alphabet, pattern = args
    trans, preds, state = decode_range(start, stop, k, alphabet)
    n = stop - start
    rows = np.arange(n)
    state = state.astype(np.int64)

    def one_period(state, count):
        errs = np.zeros(n, dtype=np.int64)
        for symbol in pattern:
            if count:
                errs += preds[rows, state] != symbol
            state = trans[rows, symbol, state].astype(np.int64)
        return state, errs

    # after K periods the period-start state sits on its cycle
    for _ in range(k):
        state, _unused = one_period(state, False)
    anchor = state.copy()
    errors = np.zeros(n, dtype=np.int64)
    periods = np.zeros(n, dtype=np.int64)
    open_ = np.ones(n, dtype=bool)
    for r in range(1, k + 1):
        state, errs = one_period(state, True)
        errors += np.where(open_, errs, 0)
        closing = open_ & (state == anchor)
        periods[closing] = r
        open_ &= ~closing
        if not open_.any():
            break
    # min of errors / periods by exact cross-multiplication
    best_e, best_p = int(errors[0]), int(periods[0])
    for e, per in set(zip(errors.tolist(), periods.tolist())):
        if e * best_p < best_e * per:
            best_e, best_p = e, per
    hit = np.flatnonzero(errors * best_p == best_e * periods)
    return best_e, best_p, start + int(hit[0])


def best_k_state(pattern: Sequence[int], k: int, alphabet: Optional[int] = None,
                 budget: int = MAX_SEARCH_PREDICTORS, workers: int = 1) -> ComplexityPoint:
    """Exhaustive minimum of the asymptotic error rate over all K-state predictors."""
    pattern = [int(s) for s in pattern]
    a = _alphabet_for(pattern, alphabet)
    total = predictor_count(k, a)
    if total > budget:
        raise BudgetExceeded(
            f"{total} predictors for K={k}, |A|={a} exceed the search budget of {budget}; "
            "use witness_point for a constructive bound"
        )
    require_int64(total)
    jobs = [(s, min(s + CHUNK, total), k, a, pattern) for s in range(0, total, CHUNK)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_chunk_rates, jobs))
    else:
        results = [_chunk_rates(j) for j in jobs]
    best_e, best_p, best_i = results[0]
    for e, per, idx in results[1:]:
        if e * best_p < best_e * per:
            best_e, best_p, best_i = e, per, idx
    n = len(pattern)
    rate = Fraction(best_e, best_p * n)
    witness = decode(best_i, k, a)
    check_rate, transient = asymptotic_error(witness, pattern)
    assert check_rate == rate, (check_rate, rate)
    return ComplexityPoint(n, k, rate, best_i, transient)


def near_cyclic_predictor(pattern: Sequence[int], alphabet: int) -> FiniteStatePredictor:
    """An (n-1)-state predictor making exactly one mistake per period.

    Phases 0..n-2 get their own state.  Phase n-1 borrows the state of some
    phase j whose symbol differs from the last one; that state moves on to
    phase j+1 under its own symbol and back to phase 0 under the last symbol.
    """
    n = len(pattern)
    if n < 2:
        raise ValueError("need a pattern of length >= 2")
    last = pattern[-1]
    j = next((i for i in range(n - 1) if pattern[i] != last), None)
    if j is None:
        raise ValueError("pattern is constant; a single state predicts it exactly")
    k = n - 1
    trans = [[0] * k for _ in range(alphabet)]
    for i in range(n - 2):
        trans[pattern[i]][i] = i + 1
    trans[pattern[n - 2]][n - 2] = j
    trans[last][j] = 0
    preds = [pattern[i] for i in range(k)]
    return FiniteStatePredictor(tuple(map(tuple, trans)), tuple(preds), 0)


def witness_point(pattern: Sequence[int], k: int, alphabet: Optional[int] = None) -> ComplexityPoint:
    """Constructive upper bound on the best rate at K states.

    K >= n: the cyclic predictor is perfect, so the bound is exact (rate 0).
    K == n-1: one mistake per period.  Smaller K: most frequent symbol.
    """
    pattern = [int(s) for s in pattern]
    a = _alphabet_for(pattern, alphabet)
    n = len(pattern)
    if k >= n:
        p = cyclic_predictor(pattern, a, k)
    elif k == n - 1 and len(set(pattern)) > 1:
        p = embed(near_cyclic_predictor(pattern, a), k)
    else:
        counts = [pattern.count(s) for s in range(a)]
        top = max(range(a), key=lambda s: (counts[s], -s))
        trans = tuple(tuple([0] * k) for _ in range(a))
        p = FiniteStatePredictor(trans, (top,) * k, 0)
    rate, transient = asymptotic_error(p, pattern)
    return ComplexityPoint(n, k, rate, encode(p), transient, exact=rate == 0, method="witness")


def profile(pattern: Sequence[int], k_max: int, alphabet: Optional[int] = None,
            budget: int = MAX_SEARCH_PREDICTORS, workers: int = 1) -> ComplexityCurve:
    """Best rate for K = 1..k_max.

    Points over budget fall back to a witness, tightened by lifting the
    previous point's witness into K states when that is better.
    """
    pattern = [int(s) for s in pattern]
    a = _alphabet_for(pattern, alphabet)
    curve = ComplexityCurve(pattern, a)
    for k in range(1, k_max + 1):
        if predictor_count(k, a) <= budget:
            point = best_k_state(pattern, k, a, budget, workers)
        else:
            point = witness_point(pattern, k, a)
            prev = curve.points[-1] if curve.points else None
            if prev is not None and prev.rate < point.rate:
                lifted = embed(decode(prev.witness, prev.k, a), k)
                rate, transient = asymptotic_error(lifted, pattern)
                point = ComplexityPoint(len(pattern), k, rate, encode(lifted), transient,
                                        exact=prev.exact and rate == 0, method="witness")
        curve.points.append(point)
    if not curve.is_monotone():
        raise AssertionError(f"complexity curve not monotone: {curve.rates()}")
    return curve
