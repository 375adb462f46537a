"""Digit-position weights of non-negative integers and multi-indices.

For ``k = kappa_1 b^(c_1-1) + ... + kappa_v b^(c_v-1)`` with nonzero digits
and ``c_1 > ... > c_v``, the order-alpha weight is ``c_1 + ... + c_min(alpha,v)``.
alpha = 1 is the NRT weight (position of the leading digit).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class WeightSpec:
    """Weight selector: ``alpha = 1`` is NRT, ``alpha > 1`` is Dick(alpha)."""

    alpha: int = 1

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError(f"alpha must be a positive integer, got {self.alpha!r}")

    @classmethod
    def nrt(cls) -> "WeightSpec":
        return cls(1)

    @classmethod
    def dick(cls, alpha: int) -> "WeightSpec":
        return cls(alpha)

    @property
    def kind(self) -> str:
        return "NRT" if self.alpha == 1 else f"Dick({self.alpha})"


NRT = WeightSpec(1)


def digit_terms(k: int, b: int) -> list[tuple[int, int]]:
    """Nonzero (position, digit) pairs of ``k``, most significant first.

    Positions are 1-based: digit kappa_{c-1} of ``k`` sits at position ``c``.
    """
    if k < 0:
        raise ValueError("indices must be non-negative")
    terms = []
    pos = 1
    while k:
        k, d = divmod(k, b)
        if d:
            terms.append((pos, d))
        pos += 1
    terms.reverse()
    return terms


def digit_positions(k: int, b: int) -> list[int]:
    return [p for p, _ in digit_terms(k, b)]


def top_position(k: int, b: int) -> int:
    """NRT weight of a single integer (0 for k = 0)."""
    c = 0
    while k:
        k //= b
        c += 1
    return c


def weight_1d(k: int, b: int, alpha: int = 1) -> int:
    if alpha == 1:
        return top_position(k, b)
    return sum(digit_positions(k, b)[:alpha])


def as_multi_index(k: int | Iterable[int]) -> MultiIndex:
    if isinstance(k, (int,)) or hasattr(k, "__index__") and not hasattr(k, "__iter__"):
        return (int(k),)
    return tuple(int(x) for x in k)


def weight(k: int | Sequence[int], w: WeightSpec, b: int) -> int:
    """Weight of ``k`` (an integer or a multi-index); coordinates add."""
    return sum(weight_1d(kj, b, w.alpha) for kj in as_multi_index(k))
