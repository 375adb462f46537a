import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hoqmc.analysis import kernel_1d
from hoqmc.constructions import criterion_V, niederreiter_matrices
from hoqmc.errors import CriterionDiverges, ResolutionTooLarge
from hoqmc.netcore import DigitalNetSpec, dual_enumerate, generate_points
from hoqmc.quality import type_pq
from hoqmc.walsh import (
    ANCHORED,
    KernelId,
    RootOfUnity,
    cell_matrix,
    character_sum,
    character_tally,
    kernel_walsh_coeff,
    kernel_walsh_coeff_1d,
    kernel_walsh_diagonal,
    kernel_walsh_table,
    phi_lambda,
    phi_table,
    sobolev_decay_constant,
    wal,
    walsh_matrix,
    walsh_transform,
)
from hoqmc.weights import NRT, WeightSpec, weight
from oracles import digits_of

SOB = [KernelId.sobolev(a) for a in (1, 2, 3)]
KERNELS = [ANCHORED] + SOB


def wal_value(k, x_digits, b):
    """Direct complex evaluation from the digit formula."""
    kd = digits_of(k, b, len(x_digits))
    e = sum(a * c for a, c in zip(kd, x_digits))
    return cmath.exp(2j * math.pi * e / b)


def cell_quad(kernel, x0, x1, y0, y1):
    """Nested adaptive quadrature with the kink at y = x passed as a breakpoint."""

    def inner(x):
        pts = [x] if y0 < x < y1 else None
        return integrate.quad(lambda y: float(kernel_1d(kernel, x, y)), y0, y1, points=pts, epsabs=1e-14, epsrel=1e-14)[0]

    pts = [y0, y1] if x0 < y0 < x1 or x0 < y1 < x1 else None
    return integrate.quad(inner, x0, x1, points=pts, epsabs=1e-14, epsrel=1e-14, limit=200)[0]


# --- Walsh functions -----------------------------------------------------


def test_wal_examples():
    assert wal(1, [1, 0], 2).value == -1
    assert wal(1, [0, 1], 2).value == 1
    assert wal(0, [1, 1], 2).value == 1
    w = wal(1, [1], 3)
    assert w.e == 1 and abs(w.value - cmath.exp(2j * math.pi / 3)) < 1e-15
    assert (RootOfUnity(2, 3) * RootOfUnity(2, 3)).e == 1
    assert RootOfUnity(1, 3).conj().e == 2


@pytest.mark.parametrize("b", [2, 3])
def test_multiplicativity(b):
    # wal_k(x) wal_k(y) = wal_k(x (+) y) with digitwise addition
    r = 4
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = int(rng.integers(b**r))
        x, y = rng.integers(0, b, r), rng.integers(0, b, r)
        assert (wal(k, x, b) * wal(k, y, b)).e == wal(k, (x + y) % b, b).e
        l = int(rng.integers(b**r))
        kl = sum(((a + c) % b) * b**i for i, (a, c) in enumerate(zip(digits_of(k, b, r), digits_of(l, b, r))))
        assert (wal(k, x, b) * wal(l, x, b)).e == wal(kl, x, b).e


@pytest.mark.parametrize("b", [2, 3])
def test_orthonormality(b):
    r = 4 if b == 2 else 3
    W = walsh_matrix(b, r)
    B = b**r
    G = W.conj().T @ W / B
    assert np.allclose(G, np.eye(B), atol=1e-12)
    for k in (0, 5, B - 1):
        for a in (0, 3, B - 1):
            assert abs(W[a, k] - wal_value(k, digits_of(a, b, r)[::-1], b)) < 1e-12


def test_character_sums():
    vdc = generate_points(DigitalNetSpec(2, 2, 2, 1, np.eye(2, dtype=int)[None]))
    assert character_sum(vdc, 4) == 4
    assert character_sum(vdc, 1) == 0
    assert character_sum(vdc, 0) == 4
    assert list(character_tally(vdc, 1)) == [2, 2]


@given(st.integers(1, 4), st.integers(0, 2**8 - 1), st.integers(0, 2**8 - 1))
def test_character_sum_detects_dual(m, k1, k2):
    spec = DigitalNetSpec(2, m, m, 2, niederreiter_matrices(2, 2, m, m))
    ps = generate_points(spec)
    from hoqmc.netcore import dual_contains

    expected = ps.N if dual_contains(spec, (k1, k2)) else 0
    assert character_sum(ps, (k1, k2)) == expected


# --- phi ----------------------------------------------------------------------


def test_phi_examples():
    assert phi_lambda([0, 0, 0], 2.0, 2) == pytest.approx(1.5, abs=1e-15)
    assert phi_lambda([1, 0, 0], 2.0, 2) == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(CriterionDiverges):
        phi_table(2, 1.0, 4)


@pytest.mark.parametrize("b,lam", [(2, 2.0), (2, 1.5), (3, 2.0), (2, 3.0)])
def test_phi_against_truncated_sum(b, lam):
    n = 4
    K = b**n if b == 3 else 2**10
    ks = np.arange(K)
    mu = np.array([weight(int(k), NRT, b) for k in ks])
    tail = (1 - 1 / b) * sum(b ** (i * (1 - lam)) for i in range(int(math.log(K, b)) + 1, 200))
    for x in [(0,) * n, (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1), (0, 1, 1, 0)]:
        if b == 3:
            x = tuple(min(v * 2, 2) for v in x)
        vals = np.array([wal_value(int(k), x, b) for k in ks])
        brute = np.real(np.sum(b ** (-lam * mu) * vals))
        # tail: k beyond K with the same (zero) low digits contribute their full weight only when x = 0
        bound = b ** (-lam * (math.log(K, b) + 1)) * K * 4 + tail
        assert abs(phi_lambda(x, lam, b) - brute) <= bound


@given(st.integers(1, 5), st.sampled_from([1.5, 2.0, 3.0]))
def test_phi_assembly_matches_dual_sum(m, lam):
    spec = DigitalNetSpec(2, m, m, 2, niederreiter_matrices(2, 2, m, m))
    ps = generate_points(spec)
    V = criterion_V(ps, lam)
    zmax = m + 8
    duals = dual_enumerate(spec, NRT, zmax)
    S = math.fsum(2.0 ** (-lam * weight(k, NRT, 2)) for k in duals)
    # tail bound: at most 2^(z - mu + 1)(z + 1) elements of weight z
    mu = m + 1
    tail = sum((z + 1) * 2.0 ** ((1 - lam) * z - mu + 1) for z in range(zmax + 1, 3000))
    assert S <= V + 1e-12 and V <= S + tail + 1e-12


# --- transforms ------------------------------------------------------------------


@pytest.mark.parametrize("b,r", [(2, 1), (2, 5), (3, 1), (3, 3), (5, 2)])
def test_transform_matches_matrix(b, r):
    rng = np.random.default_rng(b * 10 + r)
    B = b**r
    f = rng.normal(size=B) + (0 if b == 2 else 1j * rng.normal(size=B))
    W = walsh_matrix(b, r)
    assert np.allclose(walsh_transform(f, b, conj=False), W.T @ f, atol=1e-10)
    assert np.allclose(walsh_transform(f, b, conj=True), W.conj().T @ f, atol=1e-10)
    F = rng.normal(size=(3, B))
    assert np.allclose(walsh_transform(F, b, axis=1), F @ W.conj(), atol=1e-10)


# --- kernel coefficients ------------------------------------------------------------


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.label)
def test_cell_matrix_against_quadrature(kernel):
    r, B = 2, 4
    M = cell_matrix(kernel, 2, r)
    for a, c in [(0, 0), (1, 1), (0, 3), (2, 1)]:
        val = cell_quad(kernel, a / B, (a + 1) / B, c / B, (c + 1) / B)
        assert M[a, c] == pytest.approx(val, abs=1e-11)


def test_anchored_coefficient_values():
    assert kernel_walsh_coeff_1d(ANCHORED, 0, 0) == pytest.approx(1 / 3, abs=1e-15)
    assert abs(kernel_walsh_coeff_1d(ANCHORED, 1, 1)) <= 1 / 12 + 1e-15
    assert abs(kernel_walsh_coeff_1d(ANCHORED, 5, 2)) < 1e-15
    assert kernel_walsh_coeff(ANCHORED, (0, 0), (0, 0)) == pytest.approx(1 / 9, abs=1e-15)
    for a in (1, 2, 3):
        assert kernel_walsh_coeff_1d(KernelId.sobolev(a), 0, 0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.label)
def test_coefficient_against_quadrature(kernel):
    # independent route: integrate K against Walsh products on a fine cell grid of the kernel itself
    for k, l in [(1, 1), (2, 3), (3, 3), (1, 0)]:
        r = 2
        B = 2**r
        W = walsh_matrix(2, r)
        val = 0.0
        for a in range(B):
            for c in range(B):
                q = cell_quad(kernel, a / B, (a + 1) / B, c / B, (c + 1) / B)
                val += W[a, k] * W[c, l] * q
        assert kernel_walsh_coeff_1d(kernel, k, l) == pytest.approx(val, abs=1e-10)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.label)
@pytest.mark.parametrize("b", [2, 3])
def test_routes_agree(kernel, b):
    r = 6 if b == 2 else 4
    T = kernel_walsh_table(kernel, b, r)
    D = kernel_walsh_diagonal(kernel, b, r)
    assert np.allclose(np.diag(T).real, D, atol=1e-13)
    # the single-coefficient route above the table size
    for k in (b**r - 1, b ** (r - 1) + 3, b**r - 2):
        big = k + b**r * (b - 1) if b == 2 else k
        v = kernel_walsh_coeff_1d(kernel, big, big, b)
        d = kernel_walsh_diagonal(kernel, b, r + 1)[big]
        assert abs(v - d) < 1e-13
    Dbig = kernel_walsh_diagonal(kernel, 2, 12) if b == 2 else None
    if Dbig is not None:
        for k in (2**11 + 5, 2**12 - 1, 3000):
            assert abs(kernel_walsh_coeff_1d(kernel, k, k) - Dbig[k]) < 1e-13


def test_resolution_guard():
    with pytest.raises(ResolutionTooLarge):
        kernel_walsh_coeff_1d(ANCHORED, 2**17, 1)
    with pytest.raises(ResolutionTooLarge):
        kernel_walsh_table(ANCHORED, 2, 11)


@pytest.mark.parametrize("kernel", [ANCHORED, KernelId.sobolev(1), KernelId.sobolev(2)], ids=lambda k: k.label)
def test_sparsity(kernel):
    T = kernel_walsh_table(kernel, 2, 6)
    thr = kernel.sparsity_threshold
    for k in range(64):
        for l in range(64):
            t = type_pq(k, l, 2)
            if t.p + t.q >= thr:
                assert abs(T[k, l]) < 1e-13, (k, l)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_sobolev_decay_off_origin(alpha):
    kernel = KernelId.sobolev(alpha)
    C = sobolev_decay_constant(alpha, 2)
    T = kernel_walsh_table(kernel, 2, 5)
    w = WeightSpec(alpha)
    for k in range(32):
        for l in range(32):
            if k == 0 and l == 0:
                continue
            bound = C * 2.0 ** (-weight(k, w, 2) - weight(l, w, 2))
            assert abs(T[k, l]) <= bound + 1e-15, (k, l)


def test_anchored_decay():
    T = kernel_walsh_table(ANCHORED, 2, 5)
    w = WeightSpec(1)
    for k in range(32):
        for l in range(32):
            assert abs(T[k, l]) <= 2.0 ** (-weight(k, w, 2) - weight(l, w, 2)) + 1e-15


def test_table_symmetry():
    for kernel in KERNELS:
        T = kernel_walsh_table(kernel, 2, 5)
        assert np.allclose(T, T.T, atol=1e-15)
        T3 = kernel_walsh_table(kernel, 3, 3)
        assert np.allclose(T3, T3.conj().T, atol=1e-14)
