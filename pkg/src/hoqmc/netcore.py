"""Digit-exact digital nets and sequences.

Points are stored as base-b digit arrays of shape ``(N, s, n)``; digit ``i``
(0-based) of coordinate ``j`` carries weight ``b^-(i+1)``.  Floats are
produced only on request via :meth:`PointSet.to_float`.

Dual vectors ``k`` are integer multi-indices.  Only the first ``n`` digits of
each ``k_j`` enter the dual condition, so digits of ``k_j`` above position
``n`` are unconstrained; enumerations report such elements too.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence, TextIO

import numpy as np

from .errors import (
    InterlaceArity,
    InterlaceShape,
    InvalidIndex,
    SearchSpaceTooLarge,
    ShapeMismatch,
)
from .gf import check_base, nullspace_mod, span_elements
from .weights import MultiIndex, WeightSpec, as_multi_index

DEFAULT_GUARD = 2**26
DIGIT_CHARS = "0123456789abcdefghijklmnopqrstu"


def index_digits(N: int, m: int, b: int) -> np.ndarray:
    """Digits ``eta_0..eta_{m-1}`` of h = 0..N-1 as an ``(N, m)`` array."""
    h = np.arange(N, dtype=np.int64)
    return (h[:, None] // (b ** np.arange(m, dtype=np.int64))[None, :]) % b


def int_digits(k: int, b: int, n: int) -> np.ndarray:
    """First ``n`` base-b digits of ``k``, least significant first."""
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        if not k:
            break
        k, out[i] = divmod(k, b)
    return out


@dataclass(frozen=True, eq=False)
class DigitalNetSpec:
    """Generating matrices ``C_1..C_s`` (each n x m) over F_b.

    ``matrices`` is stored as an int64 array of shape ``(s, n, m)``.
    """

    b: int
    m: int
    n: int
    s: int
    matrices: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_base(self.b)
        C = np.asarray(self.matrices, dtype=np.int64)
        if C.shape != (self.s, self.n, self.m):
            raise ShapeMismatch(f"matrices have shape {C.shape}, expected {(self.s, self.n, self.m)}")
        if self.n < 1 or self.m < 0 or self.s < 1:
            raise ShapeMismatch("need n >= 1, m >= 0, s >= 1")
        if C.size and (C.min() < 0 or C.max() >= self.b):
            raise ShapeMismatch("matrix entries must lie in [0, b)")
        C = C.copy()
        C.setflags(write=False)
        object.__setattr__(self, "matrices", C)

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray] | np.ndarray, b: int) -> "DigitalNetSpec":
        C = np.asarray(matrices, dtype=np.int64) % b
        if C.ndim == 2:
            C = C[None]
        s, n, m = C.shape
        return cls(b, m, n, s, C)

    @property
    def N(self) -> int:
        return self.b**self.m

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DigitalNetSpec)
            and (self.b, self.m, self.n, self.s) == (other.b, other.m, other.n, other.s)
            and np.array_equal(self.matrices, other.matrices)
        )

    def __hash__(self) -> int:
        return hash((self.b, self.m, self.n, self.s, self.matrices.tobytes()))

    def dual_matrix(self) -> np.ndarray:
        """The m x (s n) block matrix ``[C_1^T | ... | C_s^T]``."""
        return np.concatenate([C.T for C in self.matrices], axis=1) if self.m else np.zeros((0, self.s * self.n), np.int64)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered multiset of points given by base-b digits, shape ``(N, s, n)``."""

    digits: np.ndarray = field(repr=False)
    b: int

    def __post_init__(self):
        check_base(self.b)
        D = np.asarray(self.digits)
        if D.ndim != 3:
            raise ShapeMismatch(f"digit array must be 3-d (N, s, n), got shape {D.shape}")
        D = D.astype(np.uint8, copy=True)
        D.setflags(write=False)
        object.__setattr__(self, "digits", D)

    @property
    def N(self) -> int:
        return self.digits.shape[0]

    @property
    def s(self) -> int:
        return self.digits.shape[1]

    @property
    def n(self) -> int:
        return self.digits.shape[2]

    def __len__(self) -> int:
        return self.N

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PointSet) and self.b == other.b and np.array_equal(self.digits, other.digits)

    def __hash__(self) -> int:
        return hash((self.b, self.digits.shape, self.digits.tobytes()))

    def with_precision(self, n: int) -> "PointSet":
        """Pad with trailing zero digits (or truncate) to ``n`` digits."""
        if n <= self.n:
            return PointSet(self.digits[:, :, :n], self.b)
        pad = np.zeros((self.N, self.s, n - self.n), dtype=np.uint8)
        return PointSet(np.concatenate([self.digits, pad], axis=2), self.b)

    def to_fractions(self) -> list[list[Fraction]]:
        scale = self.b**self.n
        return [[Fraction(v, scale) for v in row] for row in self._integer_values()]

    def _integer_values(self) -> list[list[int]]:
        vals = []
        for pt in self.digits.tolist():
            row = []
            for dig in pt:
                v = 0
                for d in dig:
                    v = v * self.b + d
                row.append(v)
            vals.append(row)
        return vals

    def to_float(self) -> np.ndarray:
        """Coordinates as float64, rounded to nearest.

        When ``b^n < 2^53`` the integer numerator and the denominator are both
        exact doubles, so one IEEE division rounds correctly.  Otherwise exact
        integer division is done in Python.
        """
        N, s, n = self.digits.shape
        if self.b**n < 2**53:
            powers = self.b ** np.arange(n - 1, -1, -1, dtype=np.int64)
            ints = self.digits.astype(np.int64) @ powers
            return ints.astype(np.float64) / float(self.b**n)
        scale = self.b**n
        vals = self._integer_values()
        return np.array([[v / scale for v in row] for row in vals], dtype=np.float64).reshape(N, s)

    def point(self, h: int) -> np.ndarray:
        return self.digits[h]


def generate_points(spec: DigitalNetSpec) -> PointSet:
    """The b^m points of the net, in index order h = 0, 1, ..."""
    eta = index_digits(spec.N, spec.m, spec.b)
    # (N, m) x (s, n, m) -> (N, s, n)
    digits = np.einsum("hl,jkl->hjk", eta, spec.matrices, optimize=True) % spec.b
    return PointSet(digits, spec.b)


class MatrixGenerator:
    """Infinite generating matrices supplied on demand.

    Subclasses implement :meth:`submatrices`, returning the leading
    ``n x m`` blocks of ``C_1..C_s`` as an ``(s, n, m)`` array.  Leading
    blocks must be consistent across calls (the block for larger ``n, m``
    restricts to the smaller one).
    """

    b: int
    s: int

    def submatrices(self, n: int, m: int) -> np.ndarray:
        raise NotImplementedError

    def net(self, m: int, n: int | None = None) -> DigitalNetSpec:
        n = m if n is None else n
        return DigitalNetSpec(self.b, m, max(n, 1), self.s, self.submatrices(max(n, 1), m))


class ExplicitGenerator(MatrixGenerator):
    """Generator defined by an entry function ``entry(j, k, l)`` with 0-based indices."""

    def __init__(self, b: int, s: int, entry):
        self.b = check_base(b)
        self.s = s
        self._entry = entry

    def submatrices(self, n: int, m: int) -> np.ndarray:
        out = np.zeros((self.s, n, m), dtype=np.int64)
        for j in range(self.s):
            for k in range(n):
                for l in range(m):
                    out[j, k, l] = self._entry(j, k, l) % self.b
        return out


def identity_generator(b: int = 2) -> ExplicitGenerator:
    """Van der Corput generator: the infinite identity matrix."""
    return ExplicitGenerator(b, 1, lambda j, k, l: int(k == l))


def sequence_point(gen: MatrixGenerator, h: int, n: int) -> np.ndarray:
    """Digits (shape ``(s, n)``) of the h-th point of a digital sequence."""
    if h < 0:
        raise InvalidIndex(f"sequence index must be >= 0, got {h}")
    b = gen.b
    eta = []
    while h:
        h, r = divmod(h, b)
        eta.append(r)
    if not eta:
        return np.zeros((gen.s, n), dtype=np.uint8)
    C = gen.submatrices(n, len(eta))
    return (np.einsum("jkl,l->jk", C, np.array(eta, dtype=np.int64)) % b).astype(np.uint8)


def sequence_points(gen: MatrixGenerator, count: int, n: int) -> PointSet:
    return PointSet(np.stack([sequence_point(gen, h, n) for h in range(count)]) if count else np.zeros((0, gen.s, n)), gen.b)


def digital_shift(ps: PointSet, delta: np.ndarray) -> PointSet:
    """Digitwise addition mod b of one shift vector (shape ``(s, n)``) to every point."""
    delta = np.asarray(delta)
    if delta.shape != (ps.s, ps.n):
        raise ShapeMismatch(f"shift has shape {delta.shape}, points need {(ps.s, ps.n)}")
    return PointSet((ps.digits.astype(np.int64) + delta[None].astype(np.int64)) % ps.b, ps.b)


def add_shifts(d1: np.ndarray, d2: np.ndarray, b: int) -> np.ndarray:
    return (np.asarray(d1, dtype=np.int64) + np.asarray(d2, dtype=np.int64)) % b


def interlace_digits(digits: np.ndarray, alpha: int) -> np.ndarray:
    """Weave groups of ``alpha`` consecutive coordinates digit by digit.

    Input shape ``(..., alpha*s, n)``, output ``(..., s, alpha*n)``.
    """
    *lead, S, n = digits.shape
    if alpha < 1 or S % alpha:
        raise InterlaceArity(f"dimension {S} is not divisible by alpha={alpha}")
    s = S // alpha
    x = digits.reshape(*lead, s, alpha, n)
    x = np.swapaxes(x, -1, -2)
    return x.reshape(*lead, s, alpha * n)


def interlace_points(ps: PointSet, alpha: int) -> PointSet:
    return PointSet(interlace_digits(ps.digits, alpha), ps.b)


def interlace_matrices(mats: np.ndarray | DigitalNetSpec, alpha: int) -> np.ndarray | DigitalNetSpec:
    """Interlace ``alpha*s`` square matrices into ``s`` matrices of shape (alpha m) x m.

    Row ``alpha*h + i`` (0-based) of ``D_j`` is row ``h`` of ``C_{alpha*j + i}``.
    Accepts an ``(alpha*s, m, m)`` array or a spec; returns the same kind.
    """
    spec = mats if isinstance(mats, DigitalNetSpec) else None
    C = spec.matrices if spec is not None else np.asarray(mats, dtype=np.int64)
    if C.ndim != 3 or C.shape[1] != C.shape[2]:
        raise InterlaceShape(f"interlacing needs square matrices, got shape {C.shape[1:]}")
    S, n, m = C.shape
    if alpha < 1 or S % alpha:
        raise InterlaceArity(f"{S} matrices cannot be grouped by alpha={alpha}")
    D = C.reshape(S // alpha, alpha, n, m).transpose(0, 2, 1, 3).reshape(S // alpha, alpha * n, m)
    if spec is None:
        return D
    return DigitalNetSpec(spec.b, spec.m, alpha * spec.n, spec.s // alpha, D)


def dual_contains(spec: DigitalNetSpec, k: int | Sequence[int]) -> bool:
    """Whether ``sum_j C_j^T nu_n(k_j) = 0`` in F_b^m."""
    kv = as_multi_index(k)
    if len(kv) != spec.s:
        raise ShapeMismatch(f"index has {len(kv)} coordinates, net has {spec.s}")
    acc = np.zeros(spec.m, dtype=np.int64)
    for C, kj in zip(spec.matrices, kv):
        acc += C.T @ int_digits(kj, spec.b, spec.n)
    return not np.any(acc % spec.b)


# --- weight-bounded traversal of the dual net --------------------------------



def coordinate_shapes(alpha: int, wmax: int) -> list[tuple[int, tuple[int, ...]]]:
    """Leading-digit patterns of one coordinate with weight <= ``wmax``.

    A pattern is the tuple of the (at most alpha) most significant nonzero
    digit positions.  With fewer than alpha entries the index has exactly those
    nonzero digits; with alpha entries all lower positions are free.
    """
    out: list[tuple[int, tuple[int, ...]]] = [(0, ())]

    def rec(prefix: tuple[int, ...], total: int):
        if len(prefix) == alpha:
            return
        hi = prefix[-1] - 1 if prefix else wmax
        for a in range(1, hi + 1):
            if total + a > wmax:
                break
            pat = prefix + (a,)
            out.append((total + a, pat))
            rec(pat, total + a)

    rec((), 0)
    out.sort()
    return out


def _combos(shapes, s: int, wmin: int, wmax: int) -> Iterator[tuple]:
    """Products of per-coordinate patterns with total weight in [wmin, wmax]."""
    ws = [w for w, _ in shapes]

    def rec(j: int, total: int, acc: list):
        if j == s:
            if total >= wmin and total > 0:
                yield tuple(acc)
            return
        for (w, pat) in shapes:
            if total + w > wmax:
                break
            acc.append((w, pat))
            yield from rec(j + 1, total + w, acc)
            acc.pop()

    if not ws:
        return
    yield from rec(0, 0, [])


@dataclass
class _Cell:
    """Linear-algebra data for one product pattern."""

    weight: int
    low_vars: list[tuple[int, int, bool]]  # (coordinate, position, required)
    high_req: list[tuple[int, int]]
    high_free: list[tuple[int, int]]
    basis: np.ndarray


def _cell(spec: DigitalNetSpec, alpha: int, combo) -> _Cell:
    n = spec.n
    low, high_req, high_free = [], [], []
    total = 0
    for j, (w, pat) in enumerate(combo):
        total += w
        if not pat:
            continue
        for a in pat:
            (low.append((j, a, True)) if a <= n else high_req.append((j, a)))
        if len(pat) == alpha:
            for a in range(1, pat[-1]):
                (low.append((j, a, False)) if a <= n else high_free.append((j, a)))
    if low and spec.m:
        A = np.stack([spec.matrices[j][a - 1, :] for j, a, _ in low], axis=1)
        basis = nullspace_mod(A, spec.b)
    else:
        basis = np.eye(len(low), dtype=np.int64)
    return _Cell(total, low, high_req, high_free, basis)


def _cell_size(spec: DigitalNetSpec, c: _Cell) -> int:
    b = spec.b
    return b ** c.basis.shape[0] * (b - 1) ** len(c.high_req) * b ** len(c.high_free)


def _cell_solutions(spec: DigitalNetSpec, c: _Cell) -> np.ndarray:
    """Low-digit assignments in the null space with required digits nonzero."""
    sols = span_elements(c.basis, spec.b)
    req = [i for i, (_, _, r) in enumerate(c.low_vars) if r]
    if req:
        sols = sols[np.all(sols[:, req] != 0, axis=1)]
    return sols


def _cell_indices(spec: DigitalNetSpec, c: _Cell) -> list[MultiIndex]:
    b, s = spec.b, spec.s
    sols = _cell_solutions(spec, c)
    if sols.shape[0] == 0:
        return []
    base_vals = []
    for row in sols.tolist():
        k = [0] * s
        for (j, a, _), d in zip(c.low_vars, row):
            if d:
                k[j] += d * b ** (a - 1)
        base_vals.append(k)
    highs = [((j, a), range(1, b)) for j, a in c.high_req] + [((j, a), range(b)) for j, a in c.high_free]
    out = []
    for digits in itertools.product(*(r for _, r in highs)):
        add = [0] * s
        for ((j, a), _), d in zip(highs, digits):
            add[j] += d * b ** (a - 1)
        for k in base_vals:
            out.append(tuple(x + y for x, y in zip(k, add)))
    return out


def dual_enumerate(
    spec: DigitalNetSpec,
    weight_spec: WeightSpec = WeightSpec(1),
    cutoff: int = 0,
    guard: int = DEFAULT_GUARD,
) -> list[MultiIndex]:
    """Nonzero dual elements with weight <= cutoff, sorted by (weight, k).

    The traversal runs over products of per-coordinate leading-digit
    patterns; for each pattern the null space of the matching columns of
    ``[C_1^T | ... | C_s^T]`` is enumerated and filtered.
    """
    alpha = weight_spec.alpha
    shapes = coordinate_shapes(alpha, cutoff)
    cells = [_cell(spec, alpha, combo) for combo in _combos(shapes, spec.s, 1, cutoff)]
    total = sum(_cell_size(spec, c) for c in cells)
    if total > guard:
        raise SearchSpaceTooLarge(f"dual enumeration would visit {total} candidates (guard {guard})")
    found: list[tuple[int, MultiIndex]] = []
    for c in cells:
        found.extend((c.weight, k) for k in _cell_indices(spec, c))
    found.sort()
    return [k for _, k in found]


def dual_min_weight(spec: DigitalNetSpec, weight_spec: WeightSpec = WeightSpec(1), guard: int = DEFAULT_GUARD) -> tuple[int, MultiIndex]:
    """Minimum weight of a nonzero dual element and a witness attaining it.

    Weight levels are scanned upwards; the level ``n + 1`` always has the
    witness ``b^n`` in the first coordinate, so the scan terminates.
    """
    alpha = weight_spec.alpha
    b = spec.b
    wmax = spec.n + 1
    shapes = coordinate_shapes(alpha, wmax)
    visited = 0
    for w in range(1, wmax + 1):
        for combo in _combos(shapes, spec.s, w, w):
            c = _cell(spec, alpha, combo)
            req = [i for i, (_, _, r) in enumerate(c.low_vars) if r]
            if not req:
                ks = _cell_indices_first(spec, c)
                return w, ks
            d = c.basis.shape[0]
            visited += b**d
            if visited > guard:
                raise SearchSpaceTooLarge(f"minimum-weight search exceeded {guard} candidates")
            if d == 0:
                continue
            sols = _cell_solutions(spec, c)
            if sols.shape[0]:
                return w, _cell_indices_first(spec, c, sols[:1])
    raise AssertionError("unreachable: b^n is always a dual element")


def _cell_indices_first(spec: DigitalNetSpec, c: _Cell, sols: np.ndarray | None = None) -> MultiIndex:
    b = spec.b
    k = [0] * spec.s
    row = [0] * len(c.low_vars) if sols is None else sols[0].tolist()
    for (j, a, _), d in zip(c.low_vars, row):
        k[j] += int(d) * b ** (a - 1)
    for j, a in c.high_req:
        k[j] += b ** (a - 1)
    return tuple(k)


# --- point-set files ----------------------------------------------------------


def digit_string(digits: Sequence[int]) -> str:
    return "0." + "".join(DIGIT_CHARS[d] for d in digits)


def parse_digit_string(text: str, b: int) -> list[int]:
    text = text.strip()
    if not text.startswith("0."):
        raise ValueError(f"digit string must start with '0.', got {text!r}")
    out = []
    for ch in text[2:]:
        d = DIGIT_CHARS.find(ch.lower())
        if d < 0 or d >= b:
            raise ValueError(f"invalid base-{b} digit {ch!r}")
        out.append(d)
    return out


def write_points_csv(ps: PointSet, out: TextIO, m: int | str = "", comments: Sequence[str] = ()) -> None:
    """Write the point-file format: header line, comment lines, column names, rows."""
    out.write(f"# b={ps.b} m={m} n={ps.n} s={ps.s}\n")
    for c in comments:
        out.write(f"# {c}\n")
    out.write(",".join(f"j{j + 1}_digits,j{j + 1}_float" for j in range(ps.s)) + "\n")
    floats = ps.to_float()
    for h in range(ps.N):
        cells = []
        for j in range(ps.s):
            cells.append(digit_string(ps.digits[h, j].tolist()))
            cells.append(repr(float(floats[h, j])))
        out.write(",".join(cells) + "\n")


def points_csv_text(ps: PointSet, m: int | str = "", comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    write_points_csv(ps, buf, m, comments)
    return buf.getvalue()


def read_points_csv(src: TextIO | str) -> tuple[PointSet, dict]:
    """Parse a point file; the digit columns are authoritative and floats are ignored."""
    text = src if isinstance(src, str) else src.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("point file must start with a '# b=... m=... n=... s=...' header")
    meta: dict = {}
    for tok in lines[0][1:].split():
        key, _, val = tok.partition("=")
        meta[key] = int(val) if val.lstrip("-").isdigit() else val
    for key in ("b", "n", "s"):
        if not isinstance(meta.get(key), int):
            raise ValueError(f"header is missing integer field {key}=")
    b, n, s = meta["b"], meta["n"], meta["s"]
    check_base(b)
    body = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    meta["comments"] = [ln[1:].strip() for ln in lines[1:] if ln.startswith("#")]
    if not body:
        raise ValueError("point file has no column header")
    rows = body[1:]
    digits = np.zeros((len(rows), s, n), dtype=np.uint8)
    for h, row in enumerate(rows):
        cells = row.split(",")
        if len(cells) != 2 * s:
            raise ValueError(f"row {h} has {len(cells)} columns, expected {2 * s}")
        for j in range(s):
            d = parse_digit_string(cells[2 * j], b)
            if len(d) != n:
                raise ValueError(f"row {h} coordinate {j + 1} has {len(d)} digits, expected {n}")
            digits[h, j] = d
    return PointSet(digits, b), meta
