"""Bernoulli polynomials B_0..B_10 with exact rational coefficients."""

from __future__ import annotations

import functools
import math
from fractions import Fraction

import numpy as np

from .errors import DegreeUnsupported

MAX_DEGREE = 10


@functools.lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    """B_0..B_n with the convention B_1 = -1/2."""
    B = [Fraction(1)]
    for k in range(1, n + 1):
        B.append(-sum(math.comb(k + 1, j) * B[j] for j in range(k)) / (k + 1))
    return tuple(B)


@functools.lru_cache(maxsize=None)
def bernoulli_coeffs(r: int) -> tuple[Fraction, ...]:
    """Coefficients of B_r(x), lowest degree first."""
    if not 0 <= r <= MAX_DEGREE:
        raise DegreeUnsupported(f"Bernoulli degree must be in [0, {MAX_DEGREE}], got {r}")
    Bn = bernoulli_numbers(r)
    return tuple(math.comb(r, i) * Bn[r - i] for i in range(r + 1))


def bernoulli_exact(r: int, x: Fraction | int) -> Fraction:
    v = Fraction(0)
    for c in reversed(bernoulli_coeffs(r)):
        v = v * x + c
    return v


def bernoulli(r: int, x):
    """B_r(x) in floating point; ``x`` may be a scalar or an array."""
    coeffs = [float(c) for c in bernoulli_coeffs(r)]
    x = np.asarray(x, dtype=np.float64)
    v = np.zeros_like(x)
    for c in reversed(coeffs):
        v = v * x + c
    return v if v.ndim else float(v)


def bernoulli_on_grid(r: int, B: int, us) -> tuple[list[int], int]:
    """Exact ``B_r(u / B)`` for integers ``u`` as (numerators, common denominator)."""
    coeffs = bernoulli_coeffs(r)
    L = math.lcm(*(c.denominator for c in coeffs))
    ints = [int(c * L) for c in coeffs]
    scaled = [ints[i] * B ** (r - i) for i in range(r + 1)]
    nums = []
    for u in us:
        acc = scaled[r]
        for i in range(r - 1, -1, -1):
            acc = acc * u + scaled[i]
        nums.append(acc)
    return nums, L * B**r
