"""b-adic Walsh functions and Walsh coefficients of the two kernels.

``wal_k(x) = omega_b^(sum_i kappa_{i-1} xi_i)`` with ``omega_b = exp(2 pi i / b)``,
``kappa`` the digits of ``k`` and ``xi_i`` the digits of ``x``.

Kernel coefficients ``K^(k, l) = int int K(x, y) conj(wal_k(x)) wal_l(y)``
are computed on the grid of ``b^r`` cells per axis on which both Walsh
functions are constant.  The cell integrals of each kernel split into a low
rank part and a part that depends only on the cell offset ``a - c``; both are
evaluated exactly in rational arithmetic and rounded once to float.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bernoulli import bernoulli_on_grid
from .errors import CriterionDiverges, InvalidInput, ResolutionTooLarge, ShapeMismatch
from .netcore import PointSet, index_digits
from .weights import as_multi_index, top_position

MAX_RESOLUTION = 16
MAX_SINGLE_CELLS = 2**16
MAX_TABLE_CELLS = 1024
MAX_DIAGONAL_CELLS = 4096


@dataclass(frozen=True)
class RootOfUnity:
    """``omega_b^e`` stored by its exponent."""

    e: int
    b: int

    def __post_init__(self):
        object.__setattr__(self, "e", self.e % self.b)

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        if other.b != self.b:
            raise ValueError("roots of unity of different orders")
        return RootOfUnity(self.e + other.e, self.b)

    def conj(self) -> "RootOfUnity":
        return RootOfUnity(-self.e, self.b)

    @property
    def value(self) -> complex:
        if self.e == 0:
            return 1 + 0j
        if 2 * self.e == self.b:
            return -1 + 0j
        return complex(np.exp(2j * np.pi * self.e / self.b))

    def __complex__(self) -> complex:
        return self.value


def _coerce_point(x, s: int, b: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 1 and s == 1:
        x = x[None]
    if x.ndim != 2 or x.shape[0] != s:
        raise ShapeMismatch(f"point digits of shape {x.shape} do not match {s} coordinates")
    return x.astype(np.int64)


def wal_exponent(k, x_digits, b: int) -> int:
    """Exponent of ``wal_k(x)`` for a digit array of shape ``(s, n)``."""
    kv = as_multi_index(k)
    x = _coerce_point(x_digits, len(kv), b)
    e = 0
    for kj, xj in zip(kv, x):
        i = 0
        while kj and i < xj.shape[0]:
            kj, d = divmod(kj, b)
            e += d * int(xj[i])
            i += 1
    return e % b


def wal(k, x_digits, b: int) -> RootOfUnity:
    return RootOfUnity(wal_exponent(k, x_digits, b), b)


def wal_exponents(ps: PointSet, k) -> np.ndarray:
    """Exponents of ``wal_k`` at every point of ``ps``."""
    kv = as_multi_index(k)
    if len(kv) != ps.s:
        raise ShapeMismatch(f"index has {len(kv)} coordinates, points have {ps.s}")
    e = np.zeros(ps.N, dtype=np.int64)
    for j, kj in enumerate(kv):
        i = 0
        while kj and i < ps.n:
            kj, d = divmod(kj, ps.b)
            if d:
                e += d * ps.digits[:, j, i].astype(np.int64)
            i += 1
    return e % ps.b


def character_tally(ps: PointSet, k) -> np.ndarray:
    """Number of points with ``wal_k(x) = omega^e`` for e = 0..b-1."""
    return np.bincount(wal_exponents(ps, k), minlength=ps.b)


def character_sum(ps: PointSet, k) -> complex:
    """``sum_x wal_k(x)``; exact 0 or N whenever the tally is balanced or concentrated.

    For prime b the sum vanishes iff all residues occur equally often.
    """
    t = character_tally(ps, k)
    if t[0] == ps.N:
        return complex(ps.N)
    if np.all(t == t[0]):
        return 0j
    w = np.exp(2j * np.pi * np.arange(ps.b) / ps.b)
    return complex(np.sum(t * w))


# --- dual-weight generating function -----------------------------------------


@functools.lru_cache(maxsize=None)
def _phi_table_cached(b: int, lam: float, n: int) -> np.ndarray:
    g = b ** (1.0 - lam)
    out = np.empty(n + 1)
    out[0] = 1.0 + (1.0 - 1.0 / b) * g / (1.0 - g)
    partial = 0.0
    for i0 in range(1, n + 1):
        if i0 > 1:
            partial += g ** (i0 - 1)
        out[i0] = 1.0 + (1.0 - 1.0 / b) * partial - b ** (i0 - 1.0) * b ** (-lam * i0)
    out.setflags(write=False)
    return out


def phi_table(b: int, lam: float, n: int) -> np.ndarray:
    """phi_lambda indexed by first-nonzero-digit position (0 means x = 0)."""
    if not lam > 1:
        raise CriterionDiverges(f"lambda must exceed 1, got {lam}")
    return _phi_table_cached(b, float(lam), n)


def phi_lambda(x_digits: Sequence[int], lam: float, b: int) -> float:
    """``sum_k b^(-lam mu_1(k)) wal_k(x)`` over all k >= 0 for one coordinate."""
    x = list(x_digits)
    i0 = next((i + 1 for i, d in enumerate(x) if d), 0)
    return float(phi_table(b, lam, len(x))[i0])


# --- fast Walsh transform ----------------------------------------------------


def _log_b(B: int, b: int) -> int:
    r = 0
    while b**r < B:
        r += 1
    if b**r != B:
        raise ShapeMismatch(f"length {B} is not a power of {b}")
    return r


def walsh_transform(f: np.ndarray, b: int, conj: bool = True, axis: int = -1) -> np.ndarray:
    """``F[k] = sum_a f[a] wal_k(a / b^r)`` (conjugated Walsh factor if ``conj``).

    ``f`` holds values on the cells ``[a b^-r, (a+1) b^-r)`` along ``axis``.
    """
    f = np.moveaxis(np.asarray(f), axis, -1)
    lead, B = f.shape[:-1], f.shape[-1]
    r = _log_b(B, b)
    if r == 0:
        return np.moveaxis(f.astype(np.float64 if b == 2 else np.complex128), -1, axis)
    x = f.reshape(lead + (b,) * r)
    nl = len(lead)
    axes = tuple(range(nl, nl + r))
    if b == 2:
        x = x.astype(np.float64)
        for ax in axes:
            x0 = np.take(x, 0, axis=ax)
            x1 = np.take(x, 1, axis=ax)
            x = np.stack([x0 + x1, x0 - x1], axis=ax)
    elif conj:
        x = np.fft.fftn(x, axes=axes)
    else:
        x = np.fft.ifftn(x, axes=axes) * B
    # output digit axes are kappa_0..kappa_{r-1}; flatten most significant first
    x = x.transpose(tuple(range(nl)) + axes[::-1])
    return np.moveaxis(x.reshape(lead + (B,)), -1, axis)


def walsh_matrix(b: int, r: int, ks: Sequence[int] | None = None) -> np.ndarray:
    """``W[a, k] = wal_k(a / b^r)``."""
    B = b**r
    ks = np.arange(B) if ks is None else np.asarray(ks)
    adig = index_digits(B, r, b)[:, ::-1]  # xi_1..xi_r
    kdig = (ks[:, None] // (b ** np.arange(r))[None, :]) % b
    e = (adig @ kdig.T) % b
    if b == 2:
        return 1.0 - 2.0 * e
    return np.exp(2j * np.pi * e / b)


# --- kernels -----------------------------------------------------------------


@dataclass(frozen=True)
class KernelId:
    """``anchored`` (min(1-x, 1-y)) or ``sobolev`` of smoothness ``alpha``."""

    kind: str
    alpha: int = 1

    def __post_init__(self):
        if self.kind not in ("anchored", "sobolev"):
            raise InvalidInput(f"unknown kernel {self.kind!r}")
        if self.kind == "sobolev" and not 1 <= self.alpha <= 4:
            raise InvalidInput(f"Sobolev smoothness must be in 1..4, got {self.alpha}")
        if self.kind == "anchored":
            object.__setattr__(self, "alpha", 1)

    @classmethod
    def anchored(cls) -> "KernelId":
        return cls("anchored")

    @classmethod
    def sobolev(cls, alpha: int) -> "KernelId":
        return cls("sobolev", alpha)

    @property
    def sparsity_threshold(self) -> int:
        """Coefficients vanish on pairs of total type at least this value."""
        return 3 if self.kind == "anchored" else 2 * self.alpha + 1

    @property
    def label(self) -> str:
        return "anchored" if self.kind == "anchored" else f"sobolev{self.alpha}"


ANCHORED = KernelId("anchored")


@functools.lru_cache(maxsize=32)
def cell_model(kernel: KernelId, b: int, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell integrals ``M[a, c] = (U G U^T)[a, c] + tau[a - c + B - 1]``.

    Returns ``(U, G, tau)`` with ``U`` of shape ``(B, q)``.
    """
    B = b**r
    a = np.arange(B)
    if kernel.kind == "anchored":
        # min(1-x, 1-y) = (2 - x - y - |x - y|) / 2
        U = np.stack([np.full(B, 1.0 / B), (2 * a + 1) / (2.0 * B * B)], axis=1)
        G = np.array([[1.0, -0.5], [-0.5, 0.0]])
        d = [abs(t + 1) ** 3 - 2 * abs(t) ** 3 + abs(t - 1) ** 3 for t in range(-(B - 1), B)]
        den = 12 * B**3
        tau = np.array([-v / den for v in d])
        return U, G, tau
    alpha = kernel.alpha
    cols = []
    for rr in range(alpha + 1):
        nums, den = bernoulli_on_grid(rr + 1, B, range(B + 1))
        cols.append([(nums[i + 1] - nums[i]) / (den * (rr + 1)) for i in range(B)])
    U = np.array(cols).T
    G = np.diag([1.0 / math.factorial(rr) ** 2 for rr in range(alpha + 1)])
    # second antiderivative of B_{2 alpha}(|t|) evaluated on the grid t = u / B
    deg = 2 * alpha + 2
    nums, den = bernoulli_on_grid(deg, B, range(B + 1))
    sign = 1 if alpha % 2 == 1 else -1
    scale = den * (2 * alpha + 1) * (2 * alpha + 2) * math.factorial(2 * alpha)

    def Phi(t: int) -> int:
        return nums[abs(t)]

    tau = np.array([sign * (Phi(t + 1) - 2 * Phi(t) + Phi(t - 1)) / scale for t in range(-(B - 1), B)])
    return U, G, tau


def cell_matrix(kernel: KernelId, b: int, r: int) -> np.ndarray:
    U, G, tau = cell_model(kernel, b, r)
    B = b**r
    a = np.arange(B)
    return U @ G @ U.T + tau[a[:, None] - a[None, :] + B - 1]


def _resolution(ks: Sequence[int], b: int) -> int:
    return max((top_position(int(k), b) for k in ks), default=0)


@functools.lru_cache(maxsize=12)
def kernel_walsh_table(kernel: KernelId, b: int, r: int) -> np.ndarray:
    """All 1-D coefficients ``K^(k, l)`` for ``k, l < b^r`` as a dense matrix."""
    B = b**r
    if B > MAX_TABLE_CELLS:
        raise ResolutionTooLarge(f"dense coefficient table needs b^r <= {MAX_TABLE_CELLS}, got {B}")
    M = cell_matrix(kernel, b, r)
    T = walsh_transform(walsh_transform(M, b, conj=True, axis=0), b, conj=False, axis=1)
    if b == 2:
        T = np.real(T)
    T.setflags(write=False)
    return T


def _check_single(b: int, r: int) -> None:
    if r > MAX_RESOLUTION or b**r > MAX_SINGLE_CELLS:
        raise ResolutionTooLarge(
            f"resolution r={r} exceeds the guard (r <= {MAX_RESOLUTION}, b^r <= {MAX_SINGLE_CELLS})"
        )


def kernel_walsh_coeff_1d(kernel: KernelId, k: int, l: int, b: int = 2):
    """Exact-cell evaluation of one 1-D Walsh coefficient (float for b = 2, else complex)."""
    r = _resolution((k, l), b)
    _check_single(b, r)
    B = b**r
    if B <= 64:
        v = kernel_walsh_table(kernel, b, r)[k, l]
        return float(v) if b == 2 else complex(v)
    U, G, tau = cell_model(kernel, b, r)
    W = walsh_matrix(b, r, [k, l])
    wk, wl = np.conj(W[:, 0]), W[:, 1]
    low = (wk @ U) @ G @ (U.T @ wl)
    # Toeplitz part via FFT convolution: y[a] = sum_c tau[a - c + B - 1] wl[c]
    L = 1 << (3 * B - 2).bit_length()
    y = np.fft.ifft(np.fft.fft(tau, L) * np.fft.fft(wl, L))[B - 1 : 2 * B - 1]
    val = low + wk @ y
    return float(np.real(val)) if b == 2 else complex(val)


def kernel_walsh_coeff(kernel: KernelId, kvec, lvec, b: int = 2):
    """Product over coordinates of the 1-D coefficients."""
    kv, lv = as_multi_index(kvec), as_multi_index(lvec)
    if len(kv) != len(lv):
        raise ShapeMismatch("index vectors differ in length")
    out = 1.0 if b == 2 else 1.0 + 0j
    for k, l in zip(kv, lv):
        out *= kernel_walsh_coeff_1d(kernel, k, l, b)
    return out


@functools.lru_cache(maxsize=12)
def kernel_walsh_diagonal(kernel: KernelId, b: int, r: int) -> np.ndarray:
    """``K^(k, k)`` for all ``k < b^r`` (real).

    Uses ``K^(k, k) = sum_d wal_k(d) G(d)`` with the digitwise
    autocorrelation ``G(d) = sum_a M[a, a (+) d]`` of the cell matrix.
    """
    B = b**r
    if B <= MAX_TABLE_CELLS:
        out = np.real(np.diag(kernel_walsh_table(kernel, b, r))).copy()
    else:
        if B > MAX_DIAGONAL_CELLS:
            raise ResolutionTooLarge(f"diagonal table needs b^r <= {MAX_DIAGONAL_CELLS}, got {B}")
        U, G_, tau = cell_model(kernel, b, r)
        digs = index_digits(B, r, b)
        pw = b ** np.arange(r)
        low = U @ G_
        Gd = np.empty(B)
        a = np.arange(B)
        for d in range(B):
            c = ((digs + digs[d]) % b) @ pw
            Gd[d] = np.sum(np.einsum("aq,aq->a", low, U[c])) + np.sum(tau[a - c + B - 1])
        out = np.real(walsh_transform(Gd, b, conj=False)).copy()
    out.setflags(write=False)
    return out


def sobolev_decay_constant(alpha: int, b: int) -> float:
    """Per-coordinate constant C with ``|K^_alpha(k, l)| <= C b^(-mu_alpha(k) - mu_alpha(l))``."""

    def C(tau: int) -> float:
        base = 2.0 * math.sin(math.pi / b)
        if tau == 1:
            return 1.0 / base
        return (1.0 + 1.0 / b + 1.0 / (b * (b + 1))) ** (tau - 2) / base**tau

    return max(
        sum(C(t) ** 2 / b ** (2 * (t - nu)) for t in range(nu, alpha + 1)) + 2 * C(2 * alpha) / b ** (2 * (alpha - nu))
        for nu in range(1, alpha + 1)
    )
