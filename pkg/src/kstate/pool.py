"""Weighted majority voting over an explicit pool of finite-state predictors.

The pool keeps every member's automaton in numpy arrays and advances them
together.  Two arithmetic modes are supported:

``exact``
    Weights are never stored as fractions.  A member's weight is its initial
    integer weight times ``lambda ** hits`` where ``hits`` counts its correct
    predictions, so the pool keeps an integer hit counter per member and
    reconstructs exact rational masses by grouping members on
    ``(hits, prediction)``.  This is exact for any sequence length and keeps
    million-member pools cheap.

``float``
    Plain float64 weights, multiplied by lambda on a hit and renormalized to
    sum to one after every observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .automata import (
    FiniteStatePredictor,
    RunTrace,
    decode_range,
    predictor_count,
    require_int64,
)

Scalar = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

# dense member arrays; 2**23 members is ~100 MB at K=|A|=3
MAX_POOL_MEMBERS = 2**23


class EmptyPoolError(ValueError):
    pass


def argmax_lowest(values: Sequence) -> int:
    """Index of the largest value, ties going to the lowest index."""
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def _as_lambda(lam, mode: str) -> Scalar:
    if mode == EXACT:
        lam = Fraction(lam)
    else:
        lam = float(lam)
    if lam < 1:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    return lam


class WeightedPool:
    """A pool of same-shape predictors with per-member weights.

    Build one from explicit members or with :meth:`full` for every K-state
    predictor.  ``observe`` mutates the pool in place and returns it.
    """

    def __init__(
        self,
        transitions: np.ndarray,
        predictions: np.ndarray,
        active: np.ndarray,
        lam=2,
        mode: str = EXACT,
        initial_weights: Optional[Sequence] = None,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown arithmetic mode {mode!r}; expected one of {MODES}")
        n = len(active)
        if n == 0:
            raise EmptyPoolError("pool has no members")
        if n > MAX_POOL_MEMBERS:
            raise MemoryError(f"pool of {n} members exceeds the {MAX_POOL_MEMBERS} member guard")
        self.transitions = transitions
        self.predictions = predictions
        self.active = active.astype(np.int64)
        self.k = predictions.shape[1]
        self.alphabet_size = transitions.shape[1]
        self.mode = mode
        self.lam = _as_lambda(lam, mode)
        self.t = 0
        self._rows = np.arange(n)

        if initial_weights is not None:
            base = list(initial_weights)
            if len(base) != n:
                raise ValueError(f"{len(base)} initial weights for {n} members")
            if any(w < 0 for w in base) or sum(base) <= 0:
                raise ValueError("initial weights must be nonnegative with a positive sum")

        if mode == EXACT and initial_weights is None:
            self._base = np.ones(n, dtype=np.int64)
            self._uniform = True
        elif mode == EXACT:
            fracs = [Fraction(w) for w in base]
            common = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
            ints = [int(f * common) for f in fracs]
            if max(ints) * n >= 2**62:
                raise OverflowError("initial weights too large for exact integer accumulation")
            self._base = np.asarray(ints, dtype=np.int64)
            self._uniform = len(set(ints)) == 1
        if mode == EXACT:
            self.hits = np.zeros(n, dtype=np.int64)
            self._lam_num = self.lam.numerator
            self._lam_den = self.lam.denominator
        else:
            w = np.ones(n) if initial_weights is None else np.asarray([float(x) for x in base], dtype=np.float64)
            self._w = w / w.sum()

    # -- construction ---------------------------------------------------------------

    @classmethod
    def from_members(cls, members: Sequence[FiniteStatePredictor], lam=2, mode: str = EXACT,
                     initial_weights: Optional[Sequence] = None) -> "WeightedPool":
        if not members:
            raise EmptyPoolError("pool has no members")
        k = members[0].k
        a = len(members[0].transitions)
        for m in members:
            if m.k != k or len(m.transitions) != a:
                raise ValueError("all pool members must share K and the alphabet")
        trans = np.asarray([m.transitions for m in members], dtype=np.int64)
        preds = np.asarray([m.predictions for m in members], dtype=np.int64)
        active = np.asarray([m.active_state for m in members], dtype=np.int64)
        return cls(trans, preds, active, lam, mode, initial_weights)

    @classmethod
    def full(cls, k: int, alphabet, lam=2, mode: str = EXACT) -> "WeightedPool":
        """Every K-state predictor over the alphabet, uniform weights, in index order."""
        n = predictor_count(k, alphabet)
        require_int64(n)
        if n > MAX_POOL_MEMBERS:
            raise MemoryError(f"full pool of {n} predictors exceeds the {MAX_POOL_MEMBERS} member guard")
        trans, preds, init = decode_range(0, n, k, alphabet)
        return cls(trans, preds, init, lam, mode)

    def __len__(self) -> int:
        return len(self.active)

    # -- voting ------------------------------------------------------------------------

    def current_predictions(self) -> np.ndarray:
        return self.predictions[self._rows, self.active]

    def _bucket_sums(self, keys: np.ndarray, n_keys: int) -> List[int]:
        """Exact unnormalized weight (scaled by lam_den**t) per key."""
        if self._uniform:
            width = self.t + 1
            counts = np.bincount(keys * width + self.hits, minlength=n_keys * width)
            counts = counts.reshape(n_keys, width)
            unit = int(self._base[0])
        else:
            width = self.t + 1
            counts = np.zeros(n_keys * width, dtype=np.int64)
            np.add.at(counts, keys * width + self.hits, self._base)
            counts = counts.reshape(n_keys, width)
            unit = 1
        p, q, t = self._lam_num, self._lam_den, self.t
        powers = [p**h * q ** (t - h) for h in range(width)]
        out = []
        for row in counts.tolist():
            out.append(unit * sum(c * pw for c, pw in zip(row, powers) if c))
        return out

    def masses(self) -> List[Scalar]:
        """Normalized weight mass behind each symbol."""
        preds = self.current_predictions()
        if self.mode == EXACT:
            sums = self._bucket_sums(preds.astype(np.int64), self.alphabet_size)
            total = sum(sums)
            return [Fraction(s, total) for s in sums]
        mass = np.bincount(preds, weights=self._w, minlength=self.alphabet_size)
        return [float(x) for x in mass / mass.sum()]

    def state_prediction_masses(self) -> List[List[Scalar]]:
        """K x |A| normalized mass by (active state, prediction at that state)."""
        a = self.alphabet_size
        keys = self.active * a + self.current_predictions().astype(np.int64)
        if self.mode == EXACT:
            sums = self._bucket_sums(keys, self.k * a)
            total = sum(sums)
            flat = [Fraction(s, total) for s in sums]
        else:
            mass = np.bincount(keys, weights=self._w, minlength=self.k * a)
            flat = [float(x) for x in mass / mass.sum()]
        return [flat[i * a:(i + 1) * a] for i in range(self.k)]

    def weights(self) -> List[Scalar]:
        """Per-member normalized weights (materialized; intended for small pools)."""
        if self.mode == FLOAT:
            return [float(x) for x in self._w]
        p, q, t = self._lam_num, self._lam_den, self.t
        raw = [int(b) * p**h * q ** (t - h) for b, h in zip(self._base.tolist(), self.hits.tolist())]
        total = sum(raw)
        return [Fraction(r, total) for r in raw]

    def aggregate_predict(self) -> Tuple[int, List[Scalar]]:
        masses = self.masses()
        return argmax_lowest(masses), masses

    def observe(self, outcome: int) -> "WeightedPool":
        if not isinstance(outcome, (int, np.integer)) or not 0 <= outcome < self.alphabet_size:
            raise ValueError(f"symbol {outcome!r} outside alphabet of size {self.alphabet_size}")
        correct = self.current_predictions() == outcome
        if self.mode == EXACT:
            self.hits += correct
        else:
            w = np.where(correct, self._w * self.lam, self._w)
            self._w = w / w.sum()
        self.t += 1
        self.active = self.transitions[self._rows, outcome, self.active].astype(np.int64)
        return self


@dataclass
class AggregatorRun:
    trace: RunTrace
    masses: List[List[Scalar]]
    weight_snapshots: Optional[List[List[Scalar]]] = None


def run_aggregator(pool: WeightedPool, sequence: Sequence[int], record_weights: bool = False) -> AggregatorRun:
    """Fold predict-then-observe over ``sequence``; the trace holds the pool's own mistakes."""
    trace = RunTrace()
    masses = []
    snapshots = [pool.weights()] if record_weights else None
    for symbol in sequence:
        guess, mass = pool.aggregate_predict()
        masses.append(mass)
        trace.append(guess, int(symbol))
        pool.observe(symbol)
        if record_weights:
            snapshots.append(pool.weights())
    return AggregatorRun(trace, masses, snapshots)


def best_expert_loss(k: int, alphabet, sequence: Sequence[int]) -> Tuple[int, int]:
    """Smallest cumulative loss over every K-state predictor, and the lowest index attaining it.

    Brute force: all predictors are simulated side by side.
    """
    n = predictor_count(k, alphabet)
    require_int64(n)
    trans, preds, state = decode_range(0, n, k, alphabet)
    rows = np.arange(n)
    state = state.astype(np.int64)
    loss = np.zeros(n, dtype=np.int64)
    for symbol in sequence:
        loss += preds[rows, state] != symbol
        state = trans[rows, symbol, state].astype(np.int64)
    best = int(loss.min())
    return best, int(np.flatnonzero(loss == best)[0])


@dataclass(frozen=True)
class MistakeBound:
    n_experts: int
    best_loss: int
    lam: float
    c1: float
    c2: float
    bound: float

    def holds(self, mistakes: int) -> bool:
        return mistakes <= self.bound


def mistake_bound(n_experts: int, best_loss: int, lam) -> MistakeBound:
    """Weighted-majority guarantee for 0/1 loss with hit reward lambda.

    Rewarding hits by lambda and renormalizing is the same as penalizing
    misses by beta = 1/lambda, whose classical guarantee is
    ``mistakes <= (ln(1/beta) * m + ln N) / ln(2 / (1 + beta))``.
    """
    if n_experts < 1:
        raise ValueError("need at least one expert")
    lam_f = float(lam)
    if not lam_f > 1:
        raise ValueError(f"lambda must be > 1 for a mistake bound, got {lam}")
    denom = math.log(2 * lam_f / (lam_f + 1))
    c1 = math.log(lam_f) / denom
    c2 = 1.0 / denom
    return MistakeBound(n_experts, best_loss, lam_f, c1, c2, c1 * best_loss + c2 * math.log(n_experts))
