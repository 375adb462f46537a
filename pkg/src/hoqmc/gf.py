"""Arithmetic over a prime field F_b and the polynomial ring F_b[x].

Field elements are plain Python ints in ``range(b)``.  Polynomials are
immutable :class:`Polynomial` values holding their coefficients lowest degree
first, with the zero polynomial stored as an empty tuple.

The module also carries the small amount of dense linear algebra over F_b
(rank, null space) that the net machinery needs.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DivisionByZeroPoly,
    InvalidBase,
    InvalidDegree,
    InversionOfZero,
    NotProperFraction,
)

MAX_BASE = 31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def check_base(b: int) -> int:
    """Return ``b`` if it is a supported prime base, else raise InvalidBase."""
    if not isinstance(b, (int, np.integer)) or not 2 <= b <= MAX_BASE or not is_prime(int(b)):
        raise InvalidBase(f"base must be a prime in [2, {MAX_BASE}], got {b!r}")
    return int(b)


@functools.lru_cache(maxsize=None)
def inverse_table(b: int) -> tuple[int, ...]:
    """Multiplicative inverses mod b; entry 0 is a placeholder 0."""
    check_base(b)
    return (0,) + tuple(pow(a, b - 2, b) for a in range(1, b))


def field_inv(a: int, b: int) -> int:
    """Inverse of ``a`` in F_b."""
    a %= check_base(b)
    if a == 0:
        raise InversionOfZero(f"0 has no inverse in F_{b}")
    return inverse_table(b)[a]


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """A polynomial over F_b, coefficients lowest degree first."""

    coeffs: tuple[int, ...]
    b: int

    def __init__(self, coeffs: Sequence[int], b: int):
        check_base(b)
        object.__setattr__(self, "b", int(b))
        object.__setattr__(self, "coeffs", _trim(int(c) % b for c in coeffs))

    @classmethod
    def zero(cls, b: int) -> "Polynomial":
        return cls((), b)

    @classmethod
    def one(cls, b: int) -> "Polynomial":
        return cls((1,), b)

    @classmethod
    def monomial(cls, degree: int, b: int, coeff: int = 1) -> "Polynomial":
        return cls((0,) * degree + (coeff,), b)

    @classmethod
    def from_code(cls, code: int, b: int) -> "Polynomial":
        """Inverse of :attr:`code`: read the base-b digits of ``code``."""
        digits = []
        while code:
            code, r = divmod(code, b)
            digits.append(r)
        return cls(digits, b)

    @classmethod
    def parse(cls, text: str, b: int) -> "Polynomial":
        """Parse strings like ``"x^3+2x+1"`` or ``"1"``; also accepts a bare code ``"#11"``."""
        text = text.replace(" ", "").replace("*", "")
        if text.startswith("#"):
            return cls.from_code(int(text[1:]), b)
        if text in ("", "0"):
            return cls.zero(b)
        coeffs: dict[int, int] = {}
        for sign, term in re.findall(r"([+-]?)([^+-]+)", text):
            m = re.fullmatch(r"(\d*)(x(?:\^(\d+))?)?", term)
            if m is None or (m.group(1) == "" and m.group(2) is None):
                raise ValueError(f"cannot parse polynomial term {term!r}")
            c = int(m.group(1)) if m.group(1) else 1
            deg = 0 if m.group(2) is None else int(m.group(3) or 1)
            c = -c if sign == "-" else c
            coeffs[deg] = coeffs.get(deg, 0) + c
        top = max(coeffs) if coeffs else 0
        return cls([coeffs.get(i, 0) for i in range(top + 1)], b)

    @property
    def degree(self) -> int:
        """Degree, with -1 standing in for the degree of the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def code(self) -> int:
        """Integer whose base-b digits are the coefficients (constant term lowest)."""
        v = 0
        for c in reversed(self.coeffs):
            v = v * self.b + c
        return v

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def _same_base(self, other: "Polynomial") -> None:
        if other.b != self.b:
            raise ValueError("polynomials over different fields")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._same_base(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self.coeff(i) + other.coeff(i) for i in range(n)], self.b)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs], self.b)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | int") -> "Polynomial":
        if isinstance(other, (int, np.integer)):
            return Polynomial([c * int(other) for c in self.coeffs], self.b)
        self._same_base(other)
        if self.is_zero() or other.is_zero():
            return Polynomial.zero(self.b)
        prod = np.convolve(np.array(self.coeffs, dtype=np.int64), np.array(other.coeffs, dtype=np.int64))
        return Polynomial(prod % self.b, self.b)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        result = Polynomial.one(self.b)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        return poly_divmod(self, other)

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return poly_divmod(self, other)[0]

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return poly_divmod(self, other)[1]

    def __call__(self, x: int) -> int:
        v = 0
        for c in reversed(self.coeffs):
            v = (v * x + c) % self.b
        return v

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "x" if i == 1 else f"x^{i}"
                terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(terms)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, b={self.b})"


def poly_divmod(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Euclidean division ``num = quot * den + rem`` with ``deg rem < deg den``."""
    num._same_base(den)
    if den.is_zero():
        raise DivisionByZeroPoly("division by the zero polynomial")
    b = num.b
    rem = list(num.coeffs)
    dd = den.degree
    inv_lead = field_inv(den.lead(), b)
    quot = [0] * max(len(rem) - dd, 0)
    for i in range(len(rem) - 1, dd - 1, -1):
        c = rem[i] * inv_lead % b
        if c:
            quot[i - dd] = c
            for j, dc in enumerate(den.coeffs):
                rem[i - dd + j] = (rem[i - dd + j] - c * dc) % b
    return Polynomial(quot, b), Polynomial(rem[:dd] if dd > 0 else [], b)


class LaurentPrefix:
    """Coefficients a_1, a_2, ... of ``num/den = sum_l a_l x^-l`` in F_b((x^-1)).

    The prefix grows on demand; extension continues the long division from the
    cached remainder, so earlier coefficients never change.
    """

    def __init__(self, num: Polynomial, den: Polynomial):
        num._same_base(den)
        if den.is_zero():
            raise DivisionByZeroPoly("zero denominator")
        if num.degree >= den.degree:
            raise NotProperFraction(f"deg(num)={num.degree} must be < deg(den)={den.degree}")
        self.num = num
        self.den = den
        self.b = num.b
        d = den.degree
        self._rem = [num.coeff(i) for i in range(d)]
        self._den = list(den.coeffs)
        self._inv_lead = field_inv(den.lead(), self.b)
        self._coeffs: list[int] = []

    def extend(self, L: int) -> None:
        b, d, den = self.b, len(self._den) - 1, self._den
        rem = self._rem
        while len(self._coeffs) < L:
            # multiply remainder by x; the new x^d coefficient gives a_l
            top = rem[-1] if d > 0 else 0
            rem = [0] + rem[:-1] if d > 0 else []
            a = top * self._inv_lead % b
            if a:
                for j in range(d):
                    rem[j] = (rem[j] - a * den[j]) % b
            self._coeffs.append(a)
        self._rem = rem

    def coeffs(self, L: int) -> tuple[int, ...]:
        self.extend(L)
        return tuple(self._coeffs[:L])

    def __len__(self) -> int:
        return len(self._coeffs)


def laurent_expand(num: Polynomial, den: Polynomial, L: int) -> tuple[int, ...]:
    """First ``L`` Laurent coefficients (of x^-1 .. x^-L) of ``num/den``."""
    return LaurentPrefix(num, den).coeffs(L)


def monic_polys(b: int, degree: int) -> Iterator[Polynomial]:
    """All monic polynomials of the given degree in increasing code order."""
    for low in range(b**degree):
        p = Polynomial.from_code(low + b**degree, b)
        yield p


def is_irreducible(p: Polynomial) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    d = p.degree
    if d < 1:
        return False
    for e in range(1, d // 2 + 1):
        for q in monic_polys(p.b, e):
            if (p % q).is_zero():
                return False
    return True


@functools.lru_cache(maxsize=None)
def _irreducibles_cached(b: int, count: int) -> tuple[Polynomial, ...]:
    out: list[Polynomial] = []
    degree = 1
    while len(out) < count:
        for p in monic_polys(b, degree):
            if is_irreducible(p):
                out.append(p)
                if len(out) == count:
                    break
        degree += 1
    return tuple(out)


def irreducibles(b: int, count: int) -> tuple[Polynomial, ...]:
    """First ``count`` monic irreducibles, ordered by degree then code."""
    check_base(b)
    if count < 0:
        raise ValueError("count must be >= 0")
    return _irreducibles_cached(b, count)


def _prime_factors(n: int) -> list[int]:
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def _xpow_mod(e: int, p: Polynomial) -> Polynomial:
    result = Polynomial.one(p.b)
    base = Polynomial.monomial(1, p.b) % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def multiplicative_order_of_x(p: Polynomial) -> int | None:
    """Order of x in (F_b[x]/p)^*, or None if x is not a unit or p is reducible."""
    if p.degree < 1 or p.coeff(0) == 0 or not is_irreducible(p):
        return None
    group = p.b ** p.degree - 1
    order = group
    for q in _prime_factors(group):
        while order % q == 0 and _xpow_mod(order // q, p) == Polynomial.one(p.b):
            order //= q
    return order


@functools.lru_cache(maxsize=None)
def _primitive_cached(b: int, degree: int) -> tuple[Polynomial, ...]:
    target = b**degree - 1
    return tuple(p for p in monic_polys(b, degree) if multiplicative_order_of_x(p) == target)


def primitive_polys(b: int, degree: int) -> tuple[Polynomial, ...]:
    """All monic primitive polynomials of ``degree`` (x has order b^degree - 1)."""
    check_base(b)
    if degree < 1:
        raise InvalidDegree("primitive polynomials need degree >= 1")
    return _primitive_cached(b, degree)


# --- dense linear algebra over F_b -------------------------------------------


def row_reduce(A: np.ndarray, b: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``A`` over F_b and its pivot columns."""
    R = np.array(A, dtype=np.int64) % b
    rows, cols = R.shape
    inv = inverse_table(b)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = R[r] * inv[R[r, c]] % b
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        if others.size:
            R[others] = (R[others] - np.outer(R[others, c], R[r])) % b
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod(A: np.ndarray, b: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(row_reduce(A, b)[1])


def nullspace_mod(A: np.ndarray, b: int) -> np.ndarray:
    """Basis of {x : A x = 0} over F_b, one basis vector per row."""
    A = np.asarray(A, dtype=np.int64)
    cols = A.shape[1]
    if A.shape[0] == 0 or cols == 0:
        return np.eye(cols, dtype=np.int64)
    R, pivots = row_reduce(A, b)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            basis[i, p] = (-R[r, f]) % b
    return basis


def span_elements(basis: np.ndarray, b: int) -> np.ndarray:
    """All b^d linear combinations of the ``d`` basis rows."""
    d = basis.shape[0]
    if d == 0:
        return np.zeros((1, basis.shape[1]), dtype=np.int64)
    idx = np.arange(b**d)
    coeffs = (idx[:, None] // (b ** np.arange(d))[None, :]) % b
    return coeffs @ basis % b
