"""Generating-matrix families and polynomial-lattice searches.

Niederreiter-type matrices come from Laurent expansions of
``numerator / p_j^i``; polynomial lattice point sets from ``q_j / p``.  The
searches minimise the dual-weight criterion

    V_lambda(P) = sum over nonzero dual k of b^(-lambda mu_1(k)),

evaluated in closed form from the points (see :func:`criterion_V`).
"""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import (
    CriterionDiverges,
    DegreeTooLarge,
    DimensionUnsupported,
    InterlaceArity,
    InvalidDegree,
    InvalidDimension,
    ProblemTooLarge,
)
from .gf import LaurentPrefix, Polynomial, check_base, irreducibles, primitive_polys
from .netcore import (
    DigitalNetSpec,
    MatrixGenerator,
    PointSet,
    index_digits,
    interlace_matrices,
)
from .walsh import phi_table

VARIANTS = ("review", "classic")
SOBOL_MAX_DEGREE = 10


# --- Niederreiter and Sobol' --------------------------------------------------


@functools.lru_cache(maxsize=4096)
def _expansion(num: Polynomial, den: Polynomial) -> LaurentPrefix:
    return LaurentPrefix(num, den)


def generalized_niederreiter_matrices(polys: Sequence[Polynomial], n: int, m: int, variant: str = "review") -> np.ndarray:
    """Matrices for the given base polynomials, shape ``(s, n, m)``.

    Row k (1-based) of ``C_j`` holds the Laurent coefficients of
    ``x^w / p_j^i`` with ``i = (k-1) // e_j + 1`` and ``z = (k-1) % e_j``,
    where ``w = e_j - z - 1`` (review) or ``w = z`` (classic).
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    s = len(polys)
    if s == 0:
        raise InvalidDimension("need at least one coordinate")
    b = polys[0].b
    out = np.zeros((s, n, m), dtype=np.int64)
    for j, p in enumerate(polys):
        e = p.degree
        for k in range(n):
            i, z = k // e + 1, k % e
            w = e - z - 1 if variant == "review" else z
            lp = _expansion(Polynomial.monomial(w, b), p**i)
            out[j, k] = lp.coeffs(m)
    return out


def niederreiter_matrices(b: int, s: int, n: int, m: int, variant: str = "review") -> np.ndarray:
    """Niederreiter matrices from the first ``s`` monic irreducibles over F_b."""
    check_base(b)
    if s < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {s}")
    return generalized_niederreiter_matrices(irreducibles(b, s), n, m, variant)


def niederreiter_t_bound(b: int, s: int) -> int:
    """The construction guarantee ``sum_j (deg p_j - 1)``."""
    return sum(p.degree - 1 for p in irreducibles(b, s))


@functools.lru_cache(maxsize=None)
def sobol_polynomials() -> tuple[Polynomial, ...]:
    """Primitive polynomials over F_2 of degree <= 10, by degree then code."""
    out: list[Polynomial] = []
    for d in range(1, SOBOL_MAX_DEGREE + 1):
        out.extend(primitive_polys(2, d))
    return tuple(out)


def sobol_t_bound(s: int) -> int:
    return sum(p.degree - 1 for p in sobol_polynomials()[:s])


def sobol_matrices(s: int, n: int, m: int) -> np.ndarray:
    """Sobol'-type matrices: review-variant generalized Niederreiter with primitive polynomials."""
    if s < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {s}")
    table = sobol_polynomials()
    if s > len(table):
        raise DimensionUnsupported(f"at most {len(table)} dimensions are tabulated, got {s}")
    return generalized_niederreiter_matrices(table[:s], n, m, "review")


class NiederreiterSequence(MatrixGenerator):
    """Digital sequence with Niederreiter (or Sobol') generating matrices."""

    def __init__(self, b: int, s: int, variant: str = "review", sobol: bool = False):
        self.b = 2 if sobol else check_base(b)
        self.s = s
        self.variant = variant
        self.sobol = sobol
        if s < 1:
            raise InvalidDimension(f"dimension must be >= 1, got {s}")

    def submatrices(self, n: int, m: int) -> np.ndarray:
        if self.sobol:
            return sobol_matrices(self.s, n, m)
        return niederreiter_matrices(self.b, self.s, n, m, self.variant)


# --- polynomial lattice point sets -------------------------------------------


@dataclass(frozen=True)
class LatticeConfig:
    """Modulus ``p`` (degree m) and generating vector ``q`` (each degree < m)."""

    p: Polynomial
    q: tuple[Polynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(self.q))
        if self.p.degree < 1:
            raise InvalidDegree("modulus must have degree >= 1")
        for qj in self.q:
            if qj.b != self.p.b:
                raise ValueError("generating vector and modulus over different fields")
            if qj.degree >= self.p.degree:
                raise DegreeTooLarge(f"deg(q_j) = {qj.degree} must be < deg(p) = {self.p.degree}")
        if not self.q:
            raise InvalidDimension("generating vector is empty")

    @property
    def b(self) -> int:
        return self.p.b

    @property
    def m(self) -> int:
        return self.p.degree

    @property
    def s(self) -> int:
        return len(self.q)

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(qj.code for qj in self.q)


def hankel_matrix(q: Polynomial, p: Polynomial) -> np.ndarray:
    """m x m matrix with entries ``a_{k+l-1}`` of the expansion of q/p."""
    m = p.degree
    a = np.array(LaurentPrefix(q, p).coeffs(2 * m - 1), dtype=np.int64)
    k = np.arange(m)
    return a[k[:, None] + k[None, :]]


def plps_matrices(cfg: LatticeConfig) -> np.ndarray:
    return np.stack([hankel_matrix(qj, cfg.p) for qj in cfg.q])


def plps_spec(cfg: LatticeConfig) -> DigitalNetSpec:
    M = plps_matrices(cfg)
    return DigitalNetSpec(cfg.b, cfg.m, cfg.m, cfg.s, M)


def index_polynomial(h: int, b: int) -> Polynomial:
    """h = eta_0 + eta_1 b + ... identified with eta_0 + eta_1 x + ..."""
    return Polynomial.from_code(h, b)


def plps_points_direct(cfg: LatticeConfig) -> PointSet:
    """Point h, coordinate j: first m Laurent digits of ``h(x) q_j(x) / p(x)``."""
    b, m, p = cfg.b, cfg.m, cfg.p
    digits = np.zeros((b**m, cfg.s, m), dtype=np.uint8)
    for h in range(b**m):
        hp = index_polynomial(h, b)
        for j, qj in enumerate(cfg.q):
            # the polynomial part of h q / p carries no fractional digits
            r = (hp * qj) % p
            digits[h, j] = LaurentPrefix(r, p).coeffs(m)
    return PointSet(digits, b)


# --- search criterion --------------------------------------------------------


def _check_lambda(lam: float) -> float:
    if not lam > 1:
        raise CriterionDiverges(f"the dual-weight series needs lambda > 1, got {lam}")
    return float(lam)


def first_nonzero_positions(digits: np.ndarray) -> np.ndarray:
    """1-based position of the first nonzero digit along the last axis, 0 if none."""
    nz = digits != 0
    first = np.argmax(nz, axis=-1) + 1
    return np.where(nz.any(axis=-1), first, 0)


def criterion_V(ps: PointSet, lam: float = 2.0) -> float:
    """Closed form of ``sum_{k in dual \\ 0} b^(-lam mu_1(k))`` for a digital net."""
    _check_lambda(lam)
    table = phi_table(ps.b, lam, ps.n)
    prod = table[first_nonzero_positions(ps.digits)].prod(axis=1)
    return float(prod.mean() - 1.0)


@dataclass(frozen=True)
class CbcConfig:
    """Criterion exponent for the searches; ties go to the smallest code."""

    lam: float = 2.0

    def __post_init__(self):
        _check_lambda(self.lam)


def _all_hankels(p: Polynomial) -> np.ndarray:
    """Hankel matrices for every q with deg q < m, indexed by code."""
    b, m = p.b, p.degree
    return np.stack([hankel_matrix(Polynomial.from_code(c, b), p) for c in range(b**m)])


SLOW_CBC_CELLS = 2**26


def _coordinate_phis(p: Polynomial, lam: float, hankels: np.ndarray | None = None) -> np.ndarray:
    """phi values of coordinate generated by each candidate q: shape (b^m, N)."""
    b, m = p.b, p.degree
    if b ** (2 * m) * m > SLOW_CBC_CELLS:
        raise ProblemTooLarge(f"dense candidate table b^(2m) m = {b ** (2 * m) * m} exceeds {SLOW_CBC_CELLS}")
    H = _all_hankels(p) if hankels is None else hankels
    eta = index_digits(b**m, m, b)
    digits = np.einsum("ckl,hl->chk", H, eta, optimize=True) % b
    return phi_table(b, lam, m)[first_nonzero_positions(digits)]


def _pick(vals: np.ndarray) -> int:
    """Smallest code whose value ties the minimum up to rounding.

    Values are ``mean - 1`` with means near 1, so rounding is absolute.
    """
    vmin = float(vals.min())
    return int(np.flatnonzero(vals <= vmin + 1e-12 * (1.0 + abs(vmin)))[0])


def _pow_mod(g: Polynomial, e: int, p: Polynomial) -> Polynomial:
    result, base = Polynomial.one(p.b), g % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


@functools.lru_cache(maxsize=8)
def _log_tables(p: Polynomial) -> tuple[np.ndarray, np.ndarray]:
    """Powers of a generator of (F_b[x]/p)^* as codes, and the residue digits' first-nonzero positions.

    Returns ``(pow_code, first)`` where ``pow_code[i]`` is the code of g^i and
    ``first[c]`` is the first nonzero Laurent digit position of ``c(x)/p(x)``.
    """
    from .gf import _prime_factors

    b, m = p.b, p.degree
    order = b**m - 1
    one = Polynomial.one(b)
    factors = _prime_factors(order) if order > 1 else []
    g = None
    for code in range(1, b**m):
        cand = Polynomial.from_code(code, b)
        if all(_pow_mod(cand, order // f, p) != one for f in factors):
            g = cand
            break
    # multiplication by g as a linear map on coefficient vectors
    G = np.zeros((m, m), dtype=np.int64)
    for l in range(m):
        col = (Polynomial.monomial(l, b) * g) % p
        for i, c in enumerate(col.coeffs):
            G[i, l] = c
    pow_code = np.empty(order, dtype=np.int64)
    vec = np.zeros(m, dtype=np.int64)
    vec[0] = 1
    weights = b ** np.arange(m, dtype=np.int64)
    for i in range(order):
        pow_code[i] = int(vec @ weights)
        vec = (G @ vec) % b
    # Laurent digits of c/p are linear in the coefficients of c
    L = np.zeros((m, m), dtype=np.int64)
    for l in range(m):
        L[:, l] = LaurentPrefix(Polynomial.monomial(l, b), p).coeffs(m)
    coeffs = index_digits(b**m, m, b)
    first = first_nonzero_positions((coeffs @ L.T) % b)
    return pow_code, first


def _fast_cbc(p: Polynomial, s_total: int, lam: float) -> tuple[Polynomial, ...]:
    """CBC over an irreducible modulus via cyclic correlations in the discrete-log order.

    With g a generator, index h = g^a and candidate q = g^c give the residue
    g^(a+c), so every candidate's criterion value is one entry of a cyclic
    correlation, computed for all candidates at once by FFT.
    """
    b, m = p.b, p.degree
    N = b**m
    pow_code, first = _log_tables(p)
    table = phi_table(b, lam, m)
    phi0 = float(table[0])
    flog = table[first[pow_code]]
    F = np.fft.rfft(flog)
    P = np.ones(N - 1)
    P0 = 1.0
    chosen = []
    for _ in range(s_total):
        corr = np.fft.irfft(np.conj(np.fft.rfft(P)) * F, n=N - 1)
        vals = np.empty(N)
        vals[0] = (P0 * phi0 + P.sum() * phi0) / N - 1.0
        vals[pow_code] = (P0 * phi0 + corr) / N - 1.0
        code = _pick(vals)
        chosen.append(Polynomial.from_code(code, b))
        P0 *= phi0
        if code == 0:
            P = P * phi0
        else:
            c = int(np.flatnonzero(pow_code == code)[0])
            P = P * np.roll(flog, -c)
    return tuple(chosen)


def korobov_search(p: Polynomial, m: int, s: int, lam: float = 2.0) -> LatticeConfig:
    """Best Korobov vector ``(1, q, q^2, ...) mod p`` under the criterion."""
    _check_lambda(lam)
    if p.degree != m:
        raise InvalidDegree(f"modulus degree {p.degree} differs from m = {m}")
    b = p.b
    phis = _coordinate_phis(p, lam)
    best, best_v = None, None
    for code in range(b**m):
        q = Polynomial.from_code(code, b)
        vec, cur = [], Polynomial.one(b) % p if m > 0 else Polynomial.one(b)
        for _ in range(s):
            vec.append(cur)
            cur = cur * q % p
        prod = np.ones(b**m)
        for v in vec:
            prod = prod * phis[v.code]
        val = float(prod.mean() - 1.0)
        if best_v is None or val < best_v:
            best, best_v = vec, val
    return LatticeConfig(p, tuple(best))


def cbc_search(
    p: Polynomial, m: int, s_total: int, cfg: CbcConfig = CbcConfig(), method: str = "auto"
) -> LatticeConfig:
    """Greedy component-by-component choice of ``q_1, ..., q_{s_total}``.

    ``method`` is "dense" (full candidate table), "fft" (irreducible moduli
    only) or "auto", which takes the FFT route whenever p is irreducible.
    """
    from .gf import is_irreducible

    if p.degree != m:
        raise InvalidDegree(f"modulus degree {p.degree} differs from m = {m}")
    if s_total < 1:
        raise InvalidDimension("need at least one component")
    if method not in ("auto", "dense", "fft"):
        raise ValueError(f"unknown CBC method {method!r}")
    irreducible = is_irreducible(p)
    if method == "fft" and not irreducible:
        raise ValueError("the FFT route needs an irreducible modulus")
    if method == "fft" or (method == "auto" and irreducible):
        return LatticeConfig(p, _fast_cbc(p, s_total, cfg.lam))
    b = p.b
    phis = _coordinate_phis(p, cfg.lam)
    prod = np.ones(b**m)
    chosen: list[Polynomial] = []
    for _ in range(s_total):
        vals = (prod[None, :] * phis).mean(axis=1) - 1.0
        code = _pick(vals)
        chosen.append(Polynomial.from_code(code, b))
        prod = prod * phis[code]
    return LatticeConfig(p, tuple(chosen))


def default_modulus(b: int, m: int, kind: str = "irreducible") -> Polynomial:
    """``x^m`` or the smallest monic irreducible of degree m."""
    if kind == "monomial":
        return Polynomial.monomial(m, b)
    if kind != "irreducible":
        raise ValueError(f"unknown modulus kind {kind!r}")
    from .gf import is_irreducible, monic_polys

    for cand in monic_polys(b, m):
        if is_irreducible(cand):
            return cand
    raise AssertionError("an irreducible of every degree exists")


# --- descriptors -------------------------------------------------------------


@dataclass(frozen=True)
class Descriptor:
    """Serializable construction description.

    ``s`` is the dimension of the underlying net before interlacing; the
    resulting net has dimension ``s // alpha``.
    """

    construction: str
    b: int
    s: int
    m: int
    n: int | None = None
    variant: str | None = None
    p: str | None = None
    q: tuple[str, ...] | None = None
    alpha: int | None = None

    def __post_init__(self):
        if self.construction not in ("niederreiter", "sobol", "plps"):
            raise ValueError(f"unknown construction {self.construction!r}")
        check_base(self.b)
        if self.construction == "sobol" and self.b != 2:
            raise ValueError("Sobol' matrices are binary")
        if self.s < 1:
            raise InvalidDimension(f"dimension must be >= 1, got {self.s}")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.alpha is not None and (self.alpha < 1 or self.s % self.alpha):
            raise InterlaceArity(f"s={self.s} is not divisible by alpha={self.alpha}")
        if self.q is not None:
            object.__setattr__(self, "q", tuple(self.q))

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if "q" in d:
            d["q"] = list(d["q"])
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | dict) -> "Descriptor":
        d = json.loads(text) if isinstance(text, str) else dict(text)
        if "q" in d and d["q"] is not None:
            d["q"] = tuple(d["q"])
        return cls(**d)

    @property
    def dimension(self) -> int:
        return self.s // (self.alpha or 1)


def build_spec(desc: Descriptor) -> DigitalNetSpec:
    """Generating matrices for a descriptor, interlaced when ``alpha`` is set.

    Interlacing requires square underlying matrices, so ``n`` is forced to
    ``m`` for the underlying net whenever ``alpha`` is given.
    """
    alpha = desc.alpha or 1
    m = desc.m
    n_under = m if desc.alpha else (desc.n if desc.n is not None else m)
    n_under = max(n_under, 1)
    if desc.construction == "niederreiter":
        C = niederreiter_matrices(desc.b, desc.s, n_under, m, desc.variant or "review")
        spec = DigitalNetSpec(desc.b, m, n_under, desc.s, C)
    elif desc.construction == "sobol":
        spec = DigitalNetSpec(2, m, n_under, desc.s, sobol_matrices(desc.s, n_under, m))
    else:
        if desc.p is None or desc.q is None:
            raise ValueError("plps descriptors need p and q")
        p = Polynomial.parse(desc.p, desc.b)
        q = tuple(Polynomial.parse(t, desc.b) for t in desc.q)
        if len(q) != desc.s:
            raise InvalidDimension(f"q has {len(q)} components, s = {desc.s}")
        if p.degree != m:
            raise InvalidDegree(f"deg(p) = {p.degree} differs from m = {m}")
        spec = plps_spec(LatticeConfig(p, q))
    if m == 0 and desc.alpha:
        return DigitalNetSpec(desc.b, 0, alpha, desc.s // alpha, np.zeros((desc.s // alpha, alpha, 0)))
    if desc.alpha:
        spec = interlace_matrices(spec, alpha)
    return spec
