"""The reduced K-node network with linear "boost and redistribute" updates.

Node j stands for symbol a_j (only nodes below |A| are tied to symbols).  Each
node carries an active weight; each ordered pair of nodes carries a
transition weight.  On input a_j the network boosts node j, pushes all active
weight along the transition weights, and boosts every transition into j.
Both the active vector and every transition row are kept on the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from .automata import RunTrace
from .pool import EXACT, FLOAT, MODES, argmax_lowest


@dataclass
class MeanFieldNetwork:
    w_active: List
    w_trans: List[List]
    lam: object
    alphabet_size: int
    steps: int = 0

    def __post_init__(self):
        k = len(self.w_active)
        if not 1 <= self.alphabet_size <= k:
            raise ValueError(f"need 1 <= |A| <= K, got |A|={self.alphabet_size}, K={k}")
        if len(self.w_trans) != k or any(len(r) != k for r in self.w_trans):
            raise ValueError("transition weights must be K x K")
        if self.lam < 1:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")

    @property
    def k(self) -> int:
        return len(self.w_active)

    @property
    def mode(self) -> str:
        return EXACT if isinstance(self.lam, Fraction) else FLOAT

    def to_dict(self) -> dict:
        from ._text import format_rational

        fmt = format_rational if self.mode == EXACT else float
        return {
            "steps": self.steps,
            "w_active": [fmt(x) for x in self.w_active],
            "w_trans": [[fmt(x) for x in row] for row in self.w_trans],
        }


def init_uniform(k: int, alphabet_size: int, lam=2, mode: str = EXACT) -> MeanFieldNetwork:
    if mode not in MODES:
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    if not 1 <= alphabet_size <= k:
        raise ValueError(f"the network needs |A| <= K, got |A|={alphabet_size}, K={k}")
    if mode == EXACT:
        u = Fraction(1, k)
        lam = Fraction(lam)
    else:
        u = 1.0 / k
        lam = float(lam)
    return MeanFieldNetwork([u] * k, [[u] * k for _ in range(k)], lam, alphabet_size)


def predict_scores(net: MeanFieldNetwork) -> List:
    """Incoming weight at each symbol node: sum_i w_active[i] * w_trans[i][j]."""
    return [
        sum(net.w_active[i] * net.w_trans[i][j] for i in range(net.k))
        for j in range(net.alphabet_size)
    ]


def normalized_scores(net: MeanFieldNetwork) -> List:
    scores = predict_scores(net)
    total = sum(scores)
    return [s / total for s in scores]


def network_predict(net: MeanFieldNetwork) -> int:
    return argmax_lowest(predict_scores(net))


def _normalize(v):
    s = sum(v)
    return [x / s for x in v]


def observe(net: MeanFieldNetwork, symbol: int) -> MeanFieldNetwork:
    """Apply the five update steps for input ``symbol``; returns a new network."""
    if not 0 <= symbol < net.alphabet_size:
        raise ValueError(f"symbol {symbol} outside alphabet of size {net.alphabet_size}")
    k, lam, j = net.k, net.lam, symbol
    active = list(net.w_active)
    active[j] = active[j] * lam
    active = _normalize(active)
    active = [sum(net.w_trans[i][jj] * active[i] for i in range(k)) for jj in range(k)]
    trans = [list(row) for row in net.w_trans]
    for row in trans:
        row[j] = row[j] * lam
    trans = [_normalize(row) for row in trans]
    return MeanFieldNetwork(active, trans, lam, net.alphabet_size, net.steps + 1)


def run_network(k: int, alphabet_size: int, lam, sequence: Sequence[int], mode: str = EXACT) -> RunTrace:
    net = init_uniform(k, alphabet_size, lam, mode)
    trace = RunTrace()
    for symbol in sequence:
        trace.append(network_predict(net), int(symbol))
        net = observe(net, symbol)
    return trace
