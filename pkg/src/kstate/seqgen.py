"""Sequence sources and the fixed-window baseline.

Random streams are produced block by block: block b of a stream seeded with
``seed`` comes from ``numpy.random.PCG64`` on ``SeedSequence(seed,
spawn_key=(b,))``.  Any slice of a stream is therefore reproducible on its own,
and generating in pieces gives the same symbols as generating in one go.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .automata import FiniteStatePredictor, predict, step

RNG_SCHEME = "numpy-PCG64-seedsequence-blocks-v1"
BLOCK = 1024

PERIODIC = "periodic"
IID = "iid"
AUTOMATON = "automaton-filtered"
GATED_DEMO = "gated-composite-demo"
KINDS = (PERIODIC, IID, AUTOMATON, GATED_DEMO)


@dataclass
class GeneratorSpec:
    kind: str
    length: int
    alphabet: int = 2
    pattern: Optional[List[int]] = None
    seed: int = 0
    automaton: Optional[FiniteStatePredictor] = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.alphabet < 1:
            raise ValueError("alphabet size must be positive")
        if self.kind == PERIODIC:
            if not self.pattern:
                raise ValueError("periodic generator needs a non-empty pattern")
            if max(self.pattern) >= self.alphabet or min(self.pattern) < 0:
                raise ValueError("pattern symbol outside the alphabet")
        if self.kind == AUTOMATON and self.automaton is None:
            raise ValueError("automaton-filtered generator needs an automaton")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def _block(seed: int, block: int, alphabet: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    return rng.integers(0, alphabet, size=BLOCK, dtype=np.int64)


def iid_symbols(seed: int, alphabet: int, start: int, stop: int) -> List[int]:
    """Symbols ``start..stop-1`` of the seeded uniform stream."""
    if stop <= start:
        return []
    out = []
    for b in range(start // BLOCK, (stop - 1) // BLOCK + 1):
        chunk = _block(seed, b, alphabet)
        lo = max(start - b * BLOCK, 0)
        hi = min(stop - b * BLOCK, BLOCK)
        out.extend(chunk[lo:hi].tolist())
    return out


def generate(spec: GeneratorSpec) -> List[int]:
    spec.validate()
    n = spec.length
    if spec.kind == PERIODIC:
        pat = spec.pattern
        return [pat[i % len(pat)] for i in range(n)]
    if spec.kind == IID:
        return iid_symbols(spec.seed, spec.alphabet, 0, n)
    if spec.kind == AUTOMATON:
        auto = spec.automaton
        drive = iid_symbols(spec.seed, len(auto.transitions), 0, n)
        out = []
        for u in drive:
            auto = step(auto, u)
            out.append(predict(auto))
        return out
    return gated_demo_inputs(n, spec.seed)[0]


# -- gated composite -------------------------------------------------------------------------


def _failure_table(gate: Sequence[int]) -> List[int]:
    fail = [0] * len(gate)
    j = 0
    for i in range(1, len(gate)):
        while j and gate[i] != gate[j]:
            j = fail[j - 1]
        if gate[i] == gate[j]:
            j += 1
        fail[i] = j
    return fail


def _advance_gate(gate: Sequence[int], fail: Sequence[int], progress: int, symbol: int) -> int:
    while progress and gate[progress] != symbol:
        progress = fail[progress - 1]
    if gate[progress] == symbol:
        progress += 1
    return progress


@dataclass(frozen=True)
class GatedLayout:
    """State numbering of a gated composite: (block, block state, gate progress)."""

    sizes: Tuple[int, int]
    gate_length: int

    def index(self, block: int, state: int, progress: int) -> int:
        offset = 0 if block == 0 else self.sizes[0]
        return (offset + state) * self.gate_length + progress

    def unpack(self, index: int) -> Tuple[int, int, int]:
        flat, progress = divmod(index, self.gate_length)
        if flat < self.sizes[0]:
            return 0, flat, progress
        return 1, flat - self.sizes[0], progress


def gated_composite(block_a: FiniteStatePredictor, block_b: FiniteStatePredictor,
                    gate: Optional[Sequence[int]] = None) -> FiniteStatePredictor:
    """Join two predictors so control only changes hands when ``gate`` is completed.

    Each composite state is (block, block state, gate progress).  The block
    state follows its own table; gate progress follows the pattern matcher
    (failure function on mismatch, reset to zero after a completion).  A
    completion hands control to the other block at its initial state.  The
    composite predicts whatever the controlling block's state predicts.
    """
    gate = [0] * 5 if gate is None else [int(g) for g in gate]
    a = len(block_a.transitions)
    if len(block_b.transitions) != a:
        raise ValueError("blocks must share an alphabet")
    if not gate:
        raise ValueError("gate must be non-empty")
    if any(not 0 <= g < a for g in gate):
        raise ValueError(f"gate {gate} uses symbols outside the alphabet of size {a}")
    blocks = (block_a, block_b)
    layout = GatedLayout((block_a.k, block_b.k), len(gate))
    fail = _failure_table(gate)
    k = (block_a.k + block_b.k) * len(gate)
    trans = [[0] * k for _ in range(a)]
    preds = [0] * k
    for idx in range(k):
        b, s, g = layout.unpack(idx)
        preds[idx] = blocks[b].predictions[s]
        for symbol in range(a):
            g2 = _advance_gate(gate, fail, g, symbol)
            if g2 == len(gate):
                other = 1 - b
                trans[symbol][idx] = layout.index(other, blocks[other].initial_state, 0)
            else:
                trans[symbol][idx] = layout.index(b, blocks[b].transitions[symbol][s], g2)
    start = layout.index(0, block_a.initial_state, 0)
    return FiniteStatePredictor(tuple(map(tuple, trans)), tuple(preds), start)


def gated_layout(block_a: FiniteStatePredictor, block_b: FiniteStatePredictor, gate_length: int = 5) -> GatedLayout:
    return GatedLayout((block_a.k, block_b.k), gate_length)


def _capped_runs(seed: int, length: int, symbol: int, cap: int, alphabet: int) -> List[int]:
    """Seeded stream with runs of ``symbol`` no longer than ``cap``."""
    raw = iid_symbols(seed, alphabet, 0, length)
    out, run = [], 0
    for s in raw:
        if s == symbol and run == cap:
            s = (symbol + 1) % alphabet
        run = run + 1 if s == symbol else 0
        out.append(s)
    return out


def gated_demo_inputs(length: int = 120, seed: int = 0, suffix: int = 50,
                      gate: Sequence[int] = (0, 0, 0, 0, 0)) -> Tuple[List[int], List[int]]:
    """Two binary inputs sharing their last ``suffix`` symbols.

    Only the first contains one complete gate, placed at its start; the rest
    of both inputs is a shared seeded stream that never completes the gate.
    """
    gate = list(gate)
    if length < len(gate) + suffix:
        raise ValueError(f"length must be at least {len(gate) + suffix}")
    sym = gate[0]
    if any(g != sym for g in gate):
        raise ValueError("demo expects a gate made of one repeated symbol")
    shared = _capped_runs(seed, length - len(gate) - 1, sym, len(gate) - 1, 2)
    breaker = 1 - sym
    with_gate = gate + [breaker] + shared
    without = [breaker] * (len(gate) + 1) + shared
    return with_gate, without


# -- window baseline -------------------------------------------------------------------------


@dataclass
class WindowPredictor:
    """Predicts from the last ``window`` symbols only.

    Known contexts use ``table``; unseen ones repeat the most recent symbol,
    and the empty history predicts a1.
    """

    window: int
    table: Dict[Tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")

    @classmethod
    def fit(cls, window: int, sequence: Sequence[int]) -> "WindowPredictor":
        """Majority next symbol for every length-``window`` context seen in ``sequence``."""
        counts: Dict[Tuple[int, ...], Dict[int, int]] = {}
        for i in range(window, len(sequence)):
            ctx = tuple(sequence[i - window:i])
            c = counts.setdefault(ctx, {})
            c[sequence[i]] = c.get(sequence[i], 0) + 1
        table = {ctx: min(c, key=lambda s: (-c[s], s)) for ctx, c in counts.items()}
        return cls(window, table)


def window_predict(wp: WindowPredictor, history: Sequence[int]) -> int:
    if not history:
        return 0
    ctx = tuple(history[-wp.window:])
    if ctx in wp.table:
        return wp.table[ctx]
    return ctx[-1]
