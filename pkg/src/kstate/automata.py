"""Finite-state predictors: definition, canonical indexing and execution.

A K-state predictor over an alphabet of size |A| is a transition table
``transitions[symbol][state] -> state`` plus one predicted symbol per state.
The predictor's guess for the next symbol is the prediction attached to its
active state; after the true symbol is seen the active state follows the
table.

Every predictor of a given (K, |A|) has a unique integer index::

    index = ((m * |A|**K) + q) * K + s0

where ``m`` reads the transition table row by row as a base-K number (first
entry most significant), ``q`` reads the prediction vector as a base-|A|
number, and ``s0`` is the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ._text import format_sequence, state_name, symbol_name

# numpy paths index with int64
INT64_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise ValueError(f"alphabet size must be a positive integer, got {self.size!r}")

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(range(self.size))

    def __contains__(self, symbol) -> bool:
        return isinstance(symbol, (int, np.integer)) and 0 <= symbol < self.size

    def name(self, symbol: int) -> str:
        return symbol_name(symbol)


def _alphabet_size(alphabet) -> int:
    return alphabet.size if isinstance(alphabet, Alphabet) else Alphabet(int(alphabet)).size


@dataclass(frozen=True)
class FiniteStatePredictor:
    """An immutable K-state predictor.

    ``transitions`` has one row per input symbol and one column per state.
    ``active_state`` defaults to ``initial_state``.
    """

    transitions: Tuple[Tuple[int, ...], ...]
    predictions: Tuple[int, ...]
    initial_state: int = 0
    active_state: Optional[int] = field(default=None)

    def __post_init__(self):
        trans = tuple(tuple(int(x) for x in row) for row in self.transitions)
        preds = tuple(int(x) for x in self.predictions)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "predictions", preds)
        if self.active_state is None:
            object.__setattr__(self, "active_state", self.initial_state)
        k = len(preds)
        if k < 1:
            raise ValueError("a predictor needs at least one state")
        if not trans:
            raise ValueError("a predictor needs at least one input symbol")
        n_symbols = len(trans)
        for i, row in enumerate(trans):
            if len(row) != k:
                raise ValueError(f"transition row {i} has {len(row)} entries, expected {k}")
            for j, target in enumerate(row):
                if not 0 <= target < k:
                    raise ValueError(f"transition ({symbol_name(i)}, {state_name(j)}) -> {target} is not a state")
        for i, p in enumerate(preds):
            if not 0 <= p < n_symbols:
                raise ValueError(f"prediction {p} at {state_name(i)} is not a symbol")
        for label, s in (("initial", self.initial_state), ("active", self.active_state)):
            if not 0 <= s < k:
                raise ValueError(f"{label} state {s} out of range [0, {k})")

    @property
    def k(self) -> int:
        return len(self.predictions)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.transitions))

    def describe(self) -> str:
        rows = [" ".join(state_name(t) for t in row) for row in self.transitions]
        preds = " ".join(symbol_name(p) for p in self.predictions)
        return (
            f"K={self.k} |A|={len(self.transitions)} initial={state_name(self.initial_state)} "
            f"active={state_name(self.active_state)} predictions=({preds}) G=[{'; '.join(rows)}]"
        )


@dataclass
class TraceStep:
    t: int
    predicted: int
    observed: int
    loss: int


@dataclass
class RunTrace:
    """Per-step record of a prediction run under 0/1 loss."""

    steps: List[TraceStep] = field(default_factory=list)
    cumulative_loss: int = 0
    final_state: Optional[int] = None

    def append(self, predicted: int, observed: int) -> None:
        loss = int(predicted != observed)
        self.steps.append(TraceStep(len(self.steps), predicted, observed, loss))
        self.cumulative_loss += loss

    @property
    def mistakes(self) -> int:
        return self.cumulative_loss

    def to_dict(self) -> dict:
        return {
            "steps": [[s.t, s.predicted + 1, s.observed + 1, s.loss] for s in self.steps],
            "cumulative_loss": self.cumulative_loss,
            "final_state": None if self.final_state is None else self.final_state + 1,
        }


def predictor_count(k: int, alphabet) -> int:
    """Number of K-state predictors: K**(|A|K) * |A|**K * K."""
    a = _alphabet_size(alphabet)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"K must be a positive integer, got {k!r}")
    k = int(k)
    # Python ints do not wrap; the numpy paths check INT64_LIMIT themselves.
    return k ** (a * k) * a**k * k


def require_int64(count: int, what: str = "predictor count") -> None:
    if count > INT64_LIMIT:
        raise OverflowError(f"{what} {count} exceeds the 64-bit range used by vectorized paths")


def decode(index: int, k: int, alphabet) -> FiniteStatePredictor:
    a = _alphabet_size(alphabet)
    n = predictor_count(k, a)
    if not isinstance(index, (int, np.integer)) or not 0 <= index < n:
        raise IndexError(f"predictor index {index!r} out of range [0, {n})")
    index = int(index)
    index, s0 = divmod(index, k)
    m, q = divmod(index, a**k)
    preds = [0] * k
    for i in range(k - 1, -1, -1):
        q, preds[i] = divmod(q, a)
    flat = [0] * (a * k)
    for i in range(a * k - 1, -1, -1):
        m, flat[i] = divmod(m, k)
    trans = tuple(tuple(flat[r * k:(r + 1) * k]) for r in range(a))
    return FiniteStatePredictor(trans, tuple(preds), s0)


def encode(p: FiniteStatePredictor) -> int:
    k = p.k
    a = len(p.transitions)
    m = 0
    for row in p.transitions:
        for target in row:
            m = m * k + target
    q = 0
    for sym in p.predictions:
        q = q * a + sym
    return (m * a**k + q) * k + p.initial_state


def decode_range(start: int, stop: int, k: int, alphabet):
    """Vectorized decode of indices ``start..stop-1``.

    Returns ``(transitions, predictions, initial)`` with shapes
    ``(n, |A|, K)``, ``(n, K)`` and ``(n,)``.
    """
    a = _alphabet_size(alphabet)
    n_total = predictor_count(k, a)
    require_int64(n_total)
    if not 0 <= start <= stop <= n_total:
        raise IndexError(f"range [{start}, {stop}) not inside [0, {n_total})")
    idx = np.arange(start, stop, dtype=np.int64)
    dtype = np.uint8 if max(k, a) <= 255 else np.int32
    s0 = (idx % k).astype(dtype)
    idx //= k
    q = idx % (a**k)
    m = idx // (a**k)
    preds = np.empty((idx.size, k), dtype=dtype)
    for i in range(k - 1, -1, -1):
        preds[:, i] = q % a
        q //= a
    trans = np.empty((idx.size, a * k), dtype=dtype)
    for i in range(a * k - 1, -1, -1):
        trans[:, i] = m % k
        m //= k
    return trans.reshape(idx.size, a, k), preds, s0


def _check_symbol(p: FiniteStatePredictor, symbol: int) -> None:
    if not isinstance(symbol, (int, np.integer)) or not 0 <= symbol < len(p.transitions):
        raise ValueError(f"symbol {symbol!r} outside alphabet of size {len(p.transitions)}")


def step(p: FiniteStatePredictor, symbol: int) -> FiniteStatePredictor:
    _check_symbol(p, symbol)
    return replace(p, active_state=p.transitions[symbol][p.active_state])


def predict(p: FiniteStatePredictor) -> int:
    return p.predictions[p.active_state]


def run(p: FiniteStatePredictor, sequence: Iterable[int]) -> RunTrace:
    """Predict, observe, step along ``sequence``; losses are 0/1."""
    trace = RunTrace()
    state = p.active_state
    table = p.transitions
    for symbol in sequence:
        _check_symbol(p, symbol)
        trace.append(p.predictions[state], int(symbol))
        state = table[symbol][state]
    trace.final_state = state
    return trace


def at_state(p: FiniteStatePredictor, state: int) -> FiniteStatePredictor:
    return replace(p, active_state=state)


def constant_predictor(symbol: int, alphabet, k: int = 1) -> FiniteStatePredictor:
    a = _alphabet_size(alphabet)
    trans = tuple(tuple(range(k)) for _ in range(a))
    return FiniteStatePredictor(trans, (symbol,) * k, 0)


def cyclic_predictor(pattern: Sequence[int], alphabet, k: Optional[int] = None) -> FiniteStatePredictor:
    """Predictor that reproduces ``pattern`` exactly once in phase.

    State i predicts ``pattern[i]`` and moves to state i+1 (mod n) when that
    symbol arrives.  Any other symbol resynchronizes to the state that follows
    the first occurrence of it in the pattern.  Extra states (k > n) are
    unreachable copies of state 0.
    """
    a = _alphabet_size(alphabet)
    n = len(pattern)
    if n == 0:
        raise ValueError("pattern must be non-empty")
    k = n if k is None else k
    if k < n:
        raise ValueError(f"a cyclic predictor for period {n} needs at least {n} states")
    resync = {}
    for i, sym in enumerate(pattern):
        resync.setdefault(sym, (i + 1) % n)
    trans = [[resync.get(sym, 0) for _ in range(k)] for sym in range(a)]
    for i, sym in enumerate(pattern):
        trans[sym][i] = (i + 1) % n
    preds = [pattern[i % n] if i < n else pattern[0] for i in range(k)]
    return FiniteStatePredictor(tuple(map(tuple, trans)), tuple(preds), 0)


def embed(p: FiniteStatePredictor, k: int) -> FiniteStatePredictor:
    """Same behaviour with ``k - p.k`` extra unreachable states appended."""
    if k < p.k:
        raise ValueError(f"cannot embed a {p.k}-state predictor in {k} states")
    extra = k - p.k
    trans = tuple(row + (0,) * extra for row in p.transitions)
    preds = p.predictions + (p.predictions[0],) * extra
    return FiniteStatePredictor(trans, preds, p.initial_state, p.active_state)


def format_trace(trace: RunTrace) -> str:
    predicted = format_sequence(s.predicted for s in trace.steps)
    observed = format_sequence(s.observed for s in trace.steps)
    return f"predicted {predicted}\nobserved  {observed}\nloss {trace.cumulative_loss}"
