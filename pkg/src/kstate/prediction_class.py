"""One prediction class: a fixed transition table and active state, all prediction vectors.

The class's weights live on an |A|**K hypercube whose axis i is the symbol
predicted at state i.  Rewarding the predictors that guessed symbol j at
state i multiplies one axis-aligned plane by lambda.  Starting from a uniform
cube, such updates keep the cube an outer product of its per-axis marginals,
so the K x |A| marginal table carries the same information as the cube.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

# dense cube guard
MAX_CELLS = 2**24


def _zero_like(x):
    return Fraction(0) if isinstance(x, Fraction) else 0.0


@dataclass(frozen=True)
class HypercubeWeights:
    """Dense weight cube, shape ``(|A|,) * K``; ``cells[p_1, ..., p_K]`` is w(p)."""

    cells: np.ndarray

    def __post_init__(self):
        if self.cells.ndim < 1:
            raise ValueError("cube needs at least one axis")
        if self.cells.size > MAX_CELLS:
            raise MemoryError(f"{self.cells.size} cells exceeds the dense cube guard of {MAX_CELLS}")
        if len(set(self.cells.shape)) != 1:
            raise ValueError(f"cube axes must share the alphabet size, got shape {self.cells.shape}")

    @classmethod
    def uniform(cls, k: int, alphabet_size: int, exact: bool = True) -> "HypercubeWeights":
        if alphabet_size**k > MAX_CELLS:
            raise MemoryError(f"|A|^K = {alphabet_size ** k} exceeds the dense cube guard of {MAX_CELLS}")
        n = alphabet_size**k
        if exact:
            cells = np.empty(n, dtype=object)
            cells[:] = [Fraction(1, n)] * n
        else:
            cells = np.full(n, 1.0 / n)
        return cls(cells.reshape((alphabet_size,) * k))

    @classmethod
    def point_mass(cls, prediction_vector: Sequence[int], alphabet_size: int) -> "HypercubeWeights":
        k = len(prediction_vector)
        cells = np.empty((alphabet_size,) * k, dtype=object)
        cells.fill(Fraction(0))
        cells[tuple(prediction_vector)] = Fraction(1)
        return cls(cells)

    @property
    def k(self) -> int:
        return self.cells.ndim

    @property
    def alphabet_size(self) -> int:
        return self.cells.shape[0]

    @property
    def total(self):
        return self.cells.sum()

    def cell(self, prediction_vector: Sequence[int]):
        return self.cells[tuple(prediction_vector)]


def update_plane(h: HypercubeWeights, state: int, symbol: int, lam) -> HypercubeWeights:
    """Multiply the plane ``p_state == symbol`` by lambda, then rescale to the old total."""
    if not 0 <= state < h.k:
        raise IndexError(f"state {state} out of range for K={h.k}")
    if not 0 <= symbol < h.alphabet_size:
        raise IndexError(f"symbol {symbol} out of range for |A|={h.alphabet_size}")
    cells = h.cells.copy()
    total = cells.sum()
    index = [slice(None)] * h.k
    index[state] = symbol
    cells[tuple(index)] = cells[tuple(index)] * lam
    cells = cells * (total / cells.sum())
    return HypercubeWeights(cells)


def marginals_from_hypercube(h: HypercubeWeights) -> List[list]:
    """Row i, column j: share of the cube's weight on predictors with p_i == a_j."""
    total = h.total
    if total == 0:
        raise ZeroDivisionError("cube has zero total weight")
    rows = []
    for i in range(h.k):
        axes = tuple(ax for ax in range(h.k) if ax != i)
        plane_sums = h.cells.sum(axis=axes) if axes else h.cells
        rows.append([plane_sums[j] / total for j in range(h.alphabet_size)])
    return rows


def product_of_marginals(rows: Sequence[Sequence], total) -> np.ndarray:
    """Rebuild a cube as ``total * outer(row_1, ..., row_K)``."""
    k = len(rows)
    a = len(rows[0])
    cube = np.empty((a,) * k, dtype=object)
    for idx in np.ndindex(*cube.shape):
        value = total
        for i, j in enumerate(idx):
            value = value * rows[i][j]
        cube[idx] = value
    return cube


@dataclass
class ClassMarginals:
    """Reduced form of a prediction class.

    ``w_trans[i]`` holds the normalized split of the class's weight over the
    symbols predicted at state i; ``w_state[i]`` is the weight currently
    resting on state i (one nonzero entry for a single class).
    """

    w_trans: List[list]
    w_state: List
    total: object = Fraction(1)

    @classmethod
    def uniform(cls, k: int, alphabet_size: int, active: int = 0, total=Fraction(1)) -> "ClassMarginals":
        w_trans = [[Fraction(1, alphabet_size)] * alphabet_size for _ in range(k)]
        w_state = [Fraction(0)] * k
        w_state[active] = total
        return cls(w_trans, w_state, total)

    @property
    def k(self) -> int:
        return len(self.w_trans)

    @property
    def active(self) -> int:
        nonzero = [i for i, w in enumerate(self.w_state) if w != 0]
        if len(nonzero) != 1:
            raise ValueError(f"expected exactly one occupied state, got {nonzero}")
        return nonzero[0]


def reward_row(rows: Sequence[Sequence], state: int, symbol: int, lam) -> List[list]:
    """Multiply ``rows[state][symbol]`` by lambda and renormalize that row."""
    out = [list(r) for r in rows]
    row = out[state]
    row[symbol] = row[symbol] * lam
    s = sum(row)
    out[state] = [x / s for x in row]
    return out


def class_step(m: ClassMarginals, transitions: Sequence[Sequence[int]], symbol: int, lam) -> ClassMarginals:
    """Advance one class on an observed symbol.

    The class weight grows by ``(lam - 1) * share_correct``, the active row is
    rewarded on the observed symbol, and the weight moves to the table's next
    state.
    """
    i = m.active
    if not 0 <= symbol < len(transitions):
        raise ValueError(f"symbol {symbol} outside alphabet of size {len(transitions)}")
    share = m.w_trans[i][symbol]
    total = m.total + (lam - 1) * share * m.total
    w_trans = reward_row(m.w_trans, i, symbol, lam)
    nxt = transitions[symbol][i]
    w_state = [_zero_like(total)] * m.k
    w_state[nxt] = total
    return ClassMarginals(w_trans, w_state, total)


@dataclass
class ProductFormCheck:
    ok: bool
    max_deviation: object
    steps: int
    product_form_ok: bool = True


def verify_product_form(k: int, alphabet_size: int, script: Sequence[Tuple[int, int, object]]) -> ProductFormCheck:
    """Replay ``script`` of (state, symbol, lambda) on the cube and on the marginals.

    Compares the cube's plane sums with the separately evolved marginal rows
    after every update, and checks the cube is still the product of its rows.
    """
    cube = HypercubeWeights.uniform(k, alphabet_size, exact=True)
    rows = [[Fraction(1, alphabet_size)] * alphabet_size for _ in range(k)]
    worst = Fraction(0)
    product_ok = True
    for state, symbol, lam in script:
        lam = Fraction(lam)
        cube = update_plane(cube, state, symbol, lam)
        rows = reward_row(rows, state, symbol, lam)
        from_cube = marginals_from_hypercube(cube)
        for r_cube, r_marg in zip(from_cube, rows):
            for x, y in zip(r_cube, r_marg):
                worst = max(worst, abs(x - y))
        rebuilt = product_of_marginals(rows, cube.total)
        if not np.array_equal(rebuilt, cube.cells):
            product_ok = False
    return ProductFormCheck(worst == 0 and product_ok, worst, len(script), product_ok)


def random_script(k: int, alphabet_size: int, length: int, seed: int,
                  lambdas: Sequence = (Fraction(3, 2), Fraction(2), Fraction(4))) -> List[Tuple[int, int, Fraction]]:
    rng = random.Random(seed)
    return [(rng.randrange(k), rng.randrange(alphabet_size), rng.choice(list(lambdas))) for _ in range(length)]
