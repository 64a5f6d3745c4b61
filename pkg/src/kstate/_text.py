"""Text forms shared by the CLI and the report writers.

Symbols and states are 0-indexed internally and shown 1-indexed (``a1``,
``s1``).  Rationals are always written as ``"p/q"`` so exact values survive a
JSON round trip.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, List, Sequence

_SYMBOL_RE = re.compile(r"a(\d+)")


def symbol_name(symbol: int) -> str:
    return f"a{symbol + 1}"


def state_name(state: int) -> str:
    return f"s{state + 1}"


def format_sequence(symbols: Iterable[int]) -> str:
    return "".join(symbol_name(s) for s in symbols)


def parse_sequence(text: str) -> List[int]:
    """Parse ``"a1a2a3"`` (separators allowed) or ``"[1, 2, 3]"`` into 0-based symbols."""
    text = text.strip()
    if text.startswith("["):
        import json

        values = json.loads(text)
        if not all(isinstance(v, int) and v >= 1 for v in values):
            raise ValueError(f"sequence entries must be 1-based positive integers: {text!r}")
        return [v - 1 for v in values]
    stripped = re.sub(r"[\s,]+", "", text)
    if not stripped:
        return []
    out: List[int] = []
    pos = 0
    for m in _SYMBOL_RE.finditer(stripped):
        if m.start() != pos:
            break
        index = int(m.group(1))
        if index < 1:
            raise ValueError(f"symbol a{index} is not valid; symbols start at a1")
        out.append(index - 1)
        pos = m.end()
    if pos != len(stripped):
        raise ValueError(f"cannot parse sequence {text!r}; expected e.g. 'a1a2a1'")
    return out


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rationals(values: Sequence[Fraction]) -> List[str]:
    return [format_rational(v) for v in values]
