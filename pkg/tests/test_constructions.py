import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hoqmc.constructions import (
    CbcConfig,
    Descriptor,
    LatticeConfig,
    build_spec,
    cbc_search,
    criterion_V,
    default_modulus,
    korobov_search,
    niederreiter_matrices,
    niederreiter_t_bound,
    plps_matrices,
    plps_points_direct,
    plps_spec,
    sobol_matrices,
    sobol_polynomials,
    sobol_t_bound,
)
from hoqmc.errors import (
    CriterionDiverges,
    DegreeTooLarge,
    DimensionUnsupported,
    InterlaceArity,
    InvalidDegree,
    InvalidDimension,
)
from hoqmc.gf import Polynomial, is_irreducible, laurent_expand
from hoqmc.netcore import DigitalNetSpec, PointSet, dual_enumerate, generate_points
from hoqmc.quality import t_value
from hoqmc.weights import NRT, weight


def P(text, b=2):
    return Polynomial.parse(text, b)


# --- Niederreiter and Sobol' ----------------------------------------------


@pytest.mark.parametrize("m", [1, 3, 6])
def test_van_der_corput_matrix(m):
    C = niederreiter_matrices(2, 1, m, m)
    assert np.array_equal(C[0], np.eye(m, dtype=int))


@pytest.mark.parametrize("b,s", [(2, 4), (3, 3), (5, 2)])
def test_review_variant_upper_triangular(b, s):
    C = niederreiter_matrices(b, s, 12, 12, "review")
    k, l = np.indices((12, 12))
    assert not C[:, k > l].any()
    for j in range(s):
        assert np.all(np.diag(C[j]) != 0)


def test_niederreiter_rows_are_laurent_digits():
    # row k of C_j lists digits of x^(e-z-1) / p^i (review) or x^z / p^i (classic)
    b, m = 3, 7
    p = P("x^2+1", 3)
    from hoqmc.constructions import generalized_niederreiter_matrices

    for variant in ("review", "classic"):
        C = generalized_niederreiter_matrices([p], m, m, variant)[0]
        for k in range(m):
            i, z = k // 2 + 1, k % 2
            w = 1 - z if variant == "review" else z
            assert tuple(C[k]) == laurent_expand(Polynomial.monomial(w, b), p**i, m)


@pytest.mark.parametrize("variant", ["review", "classic"])
@pytest.mark.parametrize("b,s,mmax", [(2, 1, 8), (2, 2, 8), (2, 3, 8), (2, 4, 7), (3, 2, 5), (3, 3, 4)])
def test_niederreiter_t_bound(b, s, mmax, variant):
    bound = niederreiter_t_bound(b, s)
    for m in range(1, mmax + 1):
        spec = DigitalNetSpec(b, m, m, s, niederreiter_matrices(b, s, m, m, variant))
        assert t_value(spec).t <= min(bound, m)


def test_niederreiter_two_dims_t_zero():
    for m in range(1, 9):
        spec = DigitalNetSpec(2, m, m, 2, niederreiter_matrices(2, 2, m, m))
        assert t_value(spec).t == 0


def test_sobol_first_dimension():
    C = sobol_matrices(1, 2, 2)[0]
    assert C.tolist() == [[1, 1], [0, 1]]
    ps = generate_points(DigitalNetSpec(2, 2, 2, 1, sobol_matrices(1, 2, 2)))
    assert ps.to_float()[:, 0].tolist() == [0.0, 0.5, 0.75, 0.25]
    assert sobol_polynomials()[0] == P("x+1")
    assert len(sobol_polynomials()) == sum(
        sum(1 for k in range(1, 2**d) if math.gcd(k, 2**d - 1) == 1) // d for d in range(1, 11)
    )


@pytest.mark.parametrize("s", range(1, 7))
def test_sobol_t_bound(s):
    for m in range(1, 9 if s <= 4 else 7):
        spec = DigitalNetSpec(2, m, m, s, sobol_matrices(s, m, m))
        assert t_value(spec).t <= sobol_t_bound(s)


def test_sobol_limits():
    with pytest.raises(DimensionUnsupported):
        sobol_matrices(len(sobol_polynomials()) + 1, 2, 2)
    with pytest.raises(InvalidDimension):
        niederreiter_matrices(2, 0, 2, 2)
    ps = generate_points(build_spec(Descriptor("sobol", 2, 3, 0)))
    assert ps.N == 1 and not ps.digits.any()


# --- polynomial lattices ---------------------------------------------------


def test_plps_examples():
    cfg = LatticeConfig(P("x^2"), (P("1"),))
    assert plps_matrices(cfg)[0].tolist() == [[0, 1], [1, 0]]
    assert sorted(generate_points(plps_spec(cfg)).to_float()[:, 0]) == [0, 0.25, 0.5, 0.75]
    assert plps_points_direct(cfg).to_float()[1, 0] == 0.25
    cfg = LatticeConfig(P("x"), (P("1"),))
    assert generate_points(plps_spec(cfg)).to_float()[:, 0].tolist() == [0.0, 0.5]
    cfg = LatticeConfig(P("x^3+x+1"), (P("0"), P("x")))
    ps = generate_points(plps_spec(cfg))
    assert not ps.digits[:, 0].any()


def test_lattice_validation():
    with pytest.raises(DegreeTooLarge):
        LatticeConfig(P("x^2"), (P("x^2"),))
    with pytest.raises(InvalidDegree):
        LatticeConfig(P("1"), (P("0"),))
    with pytest.raises(InvalidDimension):
        LatticeConfig(P("x^2"), ())


@st.composite
def lattices(draw):
    b = draw(st.sampled_from([2, 3]))
    m = draw(st.integers(1, 5 if b == 2 else 4))
    low = draw(st.lists(st.integers(0, b - 1), min_size=m, max_size=m))
    p = Polynomial(low + [1], b)
    s = draw(st.integers(1, 3))
    q = tuple(Polynomial.from_code(draw(st.integers(0, b**m - 1)), b) for _ in range(s))
    return LatticeConfig(p, q)


@given(lattices())
def test_plps_direct_equals_matrix_route(cfg):
    assert plps_points_direct(cfg) == generate_points(plps_spec(cfg))


@given(lattices())
def test_plps_matrices_are_hankel(cfg):
    for C in plps_matrices(cfg):
        m = C.shape[0]
        for k, l in itertools.product(range(m), repeat=2):
            if k + 1 < m and l > 0:
                assert C[k, l] == C[k + 1, l - 1]


# --- quality criterion -----------------------------------------------------


def test_criterion_examples():
    ps = PointSet(np.array([[[0]], [[1]]]), 2)
    assert criterion_V(ps, 2.0) == pytest.approx(0.125, abs=1e-15)
    assert criterion_V(PointSet(np.zeros((1, 1, 1)), 2), 2.0) == pytest.approx(0.5, abs=1e-15)
    for lam in (1.0, 0.5):
        with pytest.raises(CriterionDiverges):
            criterion_V(ps, lam)


def dual_bracket(spec, lam, Z):
    """Partial dual sum up to weight Z plus the counting-bound tail."""
    b, s = spec.b, spec.s
    part = math.fsum(b ** (-lam * weight(k, NRT, b)) for k in dual_enumerate(spec, NRT, Z))
    mu = min((weight(k, NRT, b) for k in dual_enumerate(spec, NRT, spec.n + 1)), default=spec.n + 1)
    tail = math.fsum(b ** (z - mu + 1) * (z + 1) ** (s - 1) * b ** (-lam * z) for z in range(max(Z + 1, mu), Z + 400))
    return part, part + tail


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_criterion_matches_dual_sum(lam, rng):
    cases = []
    for b, m, s in [(2, 3, 2), (2, 4, 1), (2, 6, 2), (3, 2, 2), (3, 3, 1), (2, 5, 3)]:
        cases.append(DigitalNetSpec(b, m, m, s, niederreiter_matrices(b, s, m, m)))
        cases.append(DigitalNetSpec(b, m, m, s, rng.integers(0, b, size=(s, m, m))))
    for spec in cases:
        V = criterion_V(generate_points(spec), lam)
        lo, hi = dual_bracket(spec, lam, 12 if spec.b == 2 else 8)
        assert lo - 1e-12 <= V <= hi + 1e-12


# --- searches ---------------------------------------------------------------


def V_of(p, q, lam=2.0):
    return criterion_V(generate_points(plps_spec(LatticeConfig(p, tuple(q)))), lam)


def test_korobov_small():
    p = P("x+1")
    cfg = korobov_search(p, 1, 2)
    assert cfg.codes == (1, 1)
    V1 = V_of(p, [P("1"), P("1")])
    V0 = V_of(p, [P("1"), P("0")])
    assert V1 < V0
    for b, m in [(2, 3), (2, 4), (3, 2)]:
        p = default_modulus(b, m)
        best = korobov_search(p, m, 3)
        vbest = V_of(p, best.q)
        for code in range(b**m):
            g = Polynomial.from_code(code, b)
            vec = [Polynomial.one(b), g % p, (g * g) % p]
            assert vbest <= V_of(p, vec) + 1e-12
    single = korobov_search(default_modulus(2, 3), 3, 1)
    assert single.codes == (1,)


def test_cbc_first_component_is_exhaustive_minimiser():
    for b, m in [(2, 4), (3, 2)]:
        p = default_modulus(b, m)
        first = cbc_search(p, m, 1).q[0]
        vals = [V_of(p, [Polynomial.from_code(c, b)]) for c in range(b**m)]
        assert V_of(p, [first]) <= min(vals) + 1e-12
        assert first.code == min(c for c, v in enumerate(vals) if v <= min(vals) + 1e-12)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_cbc_against_exhaustive_and_random(m, rng):
    p = default_modulus(2, m)
    for s in (2, 3):
        cbc = cbc_search(p, m, s)
        vc = V_of(p, cbc.q)
        best = min(V_of(p, [Polynomial.from_code(c, 2) for c in combo]) for combo in itertools.product(range(2**m), repeat=s))
        assert vc >= best - 1e-12
        # greedy cannot beat the optimum but must beat random vectors
        for _ in range(100):
            q = [Polynomial.from_code(int(c), 2) for c in rng.integers(0, 2**m, size=s)]
            assert vc <= V_of(p, q) + 1e-12


def test_cbc_exhaustive_cross_check_m4_s2():
    p = default_modulus(2, 4)
    cbc = cbc_search(p, 4, 2)
    best = min(V_of(p, [P("1"), Polynomial.from_code(c, 2)]) for c in range(16))
    assert V_of(p, cbc.q) == pytest.approx(best, abs=1e-15)


def test_cbc_is_extensible():
    p = default_modulus(2, 6)
    four = cbc_search(p, 6, 4)
    assert four.codes[:2] == cbc_search(p, 6, 2).codes
    assert four.codes == (1, 41, 54, 60)


@pytest.mark.parametrize("b,m", [(2, 5), (2, 8), (3, 3), (3, 4), (5, 2), (7, 2)])
def test_cbc_routes_agree(b, m):
    p = default_modulus(b, m)
    assert is_irreducible(p)
    for s in (1, 3, 5):
        assert cbc_search(p, m, s, method="dense").codes == cbc_search(p, m, s, method="fft").codes


def test_cbc_monomial_modulus():
    p = default_modulus(2, 4, "monomial")
    assert p == P("x^4")
    cfg = cbc_search(p, 4, 2)
    assert cfg.codes[0] in range(16)
    with pytest.raises(ValueError):
        cbc_search(p, 4, 2, method="fft")


def test_search_validation():
    p = default_modulus(2, 3)
    with pytest.raises(InvalidDegree):
        cbc_search(p, 4, 2)
    with pytest.raises(InvalidDimension):
        cbc_search(p, 3, 0)
    with pytest.raises(CriterionDiverges):
        CbcConfig(1.0)


# --- descriptors -------------------------------------------------------------


def test_descriptor_round_trip():
    d = Descriptor("plps", 2, 2, 4, p="x^4+x+1", q=("1", "x^3+x"))
    text = d.to_json()
    assert json.loads(text) == {"b": 2, "construction": "plps", "m": 4, "p": "x^4+x+1", "q": ["1", "x^3+x"], "s": 2}
    assert Descriptor.from_json(text) == d
    assert Descriptor.from_json(json.loads(text)) == d


def test_descriptor_validation():
    with pytest.raises(InterlaceArity):
        Descriptor("niederreiter", 2, 3, 2, alpha=2)
    with pytest.raises(ValueError):
        Descriptor("halton", 2, 1, 2)
    with pytest.raises(ValueError):
        Descriptor("sobol", 3, 1, 2)


def test_build_spec_interlaced_shape():
    spec = build_spec(Descriptor("niederreiter", 2, 6, 5, alpha=3))
    assert (spec.s, spec.n, spec.m) == (2, 15, 5)
    spec0 = build_spec(Descriptor("niederreiter", 2, 4, 0, alpha=2))
    assert spec0.N == 1 and spec0.s == 2
