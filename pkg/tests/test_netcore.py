import io
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hoqmc.constructions import niederreiter_matrices, sobol_matrices
from hoqmc.errors import InterlaceArity, InterlaceShape, InvalidIndex, SearchSpaceTooLarge, ShapeMismatch
from hoqmc.gf import rank_mod
from hoqmc.netcore import (
    DigitalNetSpec,
    PointSet,
    digital_shift,
    add_shifts,
    dual_contains,
    dual_enumerate,
    dual_min_weight,
    generate_points,
    identity_generator,
    interlace_matrices,
    interlace_points,
    points_csv_text,
    read_points_csv,
    sequence_point,
    sequence_points,
    write_points_csv,
)
from hoqmc.walsh import character_sum
from hoqmc.weights import NRT, WeightSpec, weight
from oracles import brute_dual, brute_points


def spec_from(mats, b):
    return DigitalNetSpec.from_matrices(np.asarray(mats), b)


@st.composite
def random_specs(draw, bases=(2, 3), max_m=4, max_s=2, square=False):
    b = draw(st.sampled_from(bases))
    m = draw(st.integers(1, max_m))
    s = draw(st.integers(1, max_s))
    n = m if square else draw(st.integers(1, max_m + 1))
    entries = draw(st.lists(st.integers(0, b - 1), min_size=s * n * m, max_size=s * n * m))
    return DigitalNetSpec(b, m, n, s, np.array(entries).reshape(s, n, m))


# --- generation -----------------------------------------------------------


def test_van_der_corput_order():
    ps = generate_points(spec_from([np.eye(2, dtype=int)], 2))
    assert ps.to_float()[:, 0].tolist() == [0.0, 0.5, 0.25, 0.75]


def test_m_zero_and_zero_matrix():
    ps = generate_points(DigitalNetSpec(2, 0, 3, 2, np.zeros((2, 3, 0))))
    assert ps.N == 1 and not ps.digits.any()
    ps = generate_points(DigitalNetSpec(3, 2, 2, 1, np.zeros((1, 2, 2))))
    assert ps.N == 9 and not ps.digits.any()


@given(random_specs(max_m=3))
def test_generation_matches_matrix_products(spec):
    ps = generate_points(spec)
    assert ps.to_fractions() == brute_points(spec.matrices, spec.b)


@given(random_specs(max_m=4, max_s=2))
def test_injective_iff_full_rank(spec):
    ps = generate_points(spec)
    distinct = len({p.tobytes() for p in ps.digits})
    stacked = spec.matrices.reshape(-1, spec.m)
    assert (distinct == spec.N) == (rank_mod(stacked, spec.b) == spec.m)


def test_float_conversion_exact_and_rounded():
    ps = PointSet(np.array([[[1, 0, 1]]]), 2)
    assert ps.to_float()[0, 0] == 0.625
    # 60 binary digits: the Python path must still round to nearest
    digs = np.ones((1, 1, 60), dtype=np.uint8)
    ps = PointSet(digs, 2)
    exact = Fraction(2**60 - 1, 2**60)
    assert ps.to_float()[0, 0] == float(exact)
    ps3 = PointSet(np.full((1, 1, 40), 2, dtype=np.uint8), 3)
    assert ps3.to_float()[0, 0] == float(Fraction(3**40 - 1, 3**40))


def test_with_precision():
    ps = PointSet(np.array([[[1, 1]]]), 2)
    assert ps.with_precision(4).digits.tolist() == [[[1, 1, 0, 0]]]
    assert ps.with_precision(1).digits.tolist() == [[[1]]]


# --- sequences -------------------------------------------------------------


def test_sequence_points():
    gen = identity_generator(2)
    assert PointSet(sequence_point(gen, 3, 4)[None], 2).to_float()[0, 0] == 0.75
    assert not sequence_point(gen, 0, 5).any()
    assert sequence_points(gen, 4, 3).to_float()[:, 0].tolist() == [0.0, 0.5, 0.25, 0.75]
    with pytest.raises(InvalidIndex):
        sequence_point(gen, -1, 3)


@pytest.mark.parametrize("variant", ["review", "classic"])
@pytest.mark.parametrize("b,s", [(2, 3), (3, 2)])
def test_niederreiter_sequence_prefix_is_net(b, s, variant):
    from hoqmc.constructions import NiederreiterSequence

    gen = NiederreiterSequence(b, s, variant)
    for m in range(0, 5 if b == 2 else 4):
        n = max(m, 1) + 2
        pre = sequence_points(gen, b**m, n)
        net = generate_points(gen.net(m, n))
        assert np.array_equal(pre.digits, net.digits)


def test_sobol_sequence_prefix_is_net():
    from hoqmc.constructions import NiederreiterSequence

    gen = NiederreiterSequence(2, 4, sobol=True)
    for m in range(0, 8):
        n = max(m, 1)
        pre = sequence_points(gen, 2**m, n)
        net = DigitalNetSpec(2, m, n, 4, sobol_matrices(4, n, m))
        assert np.array_equal(pre.digits, generate_points(net).digits)


# --- shifts ----------------------------------------------------------------


def test_shift_examples():
    ps = PointSet(np.array([[[1, 0]], [[0, 1]]]), 2)
    assert digital_shift(ps, np.zeros((1, 2), int)) == ps
    same = digital_shift(ps, np.array([[0, 1]]))
    assert same.to_float()[0, 0] == 0.75  # 0.5 (+) 0.25
    with pytest.raises(ShapeMismatch):
        digital_shift(ps, np.zeros((2, 2)))


@given(random_specs(bases=(2, 3, 5), max_m=3), st.integers(0, 2**32 - 1))
def test_shift_composition(spec, seed):
    rng = np.random.default_rng(seed)
    ps = generate_points(spec)
    d1 = rng.integers(0, spec.b, size=(spec.s, spec.n))
    d2 = rng.integers(0, spec.b, size=(spec.s, spec.n))
    lhs = digital_shift(digital_shift(ps, d1), d2)
    assert lhs == digital_shift(ps, add_shifts(d1, d2, spec.b))
    if spec.b == 2:
        assert not digital_shift(ps, ps.digits[0]).digits[0].any()


# --- interlacing -----------------------------------------------------------


def test_interlace_examples():
    ps = PointSet(np.array([[[1], [1]], [[0], [1]]]), 2)
    out = interlace_points(ps, 2).to_float()[:, 0]
    assert out.tolist() == [0.75, 0.25]
    assert interlace_points(ps, 1) == ps
    eye = np.eye(2, dtype=int)
    D = interlace_matrices(np.stack([eye, eye]), 2)
    assert D[0].tolist() == [[1, 0], [1, 0], [0, 1], [0, 1]]
    assert np.array_equal(interlace_matrices(np.stack([eye]), 1), np.stack([eye]))


def test_interlace_errors():
    with pytest.raises(InterlaceArity):
        interlace_matrices(np.zeros((3, 2, 2), int), 2)
    with pytest.raises(InterlaceShape):
        interlace_matrices(np.zeros((2, 3, 2), int), 2)
    with pytest.raises(InterlaceArity):
        interlace_points(PointSet(np.zeros((1, 3, 2)), 2), 2)


@st.composite
def interlace_cases(draw):
    b = draw(st.sampled_from([2, 3]))
    m = draw(st.integers(1, 4))
    s = draw(st.integers(1, 2))
    alpha = draw(st.integers(1, 3))
    S = alpha * s
    entries = draw(st.lists(st.integers(0, b - 1), min_size=S * m * m, max_size=S * m * m))
    return DigitalNetSpec(b, m, m, S, np.array(entries).reshape(S, m, m)), alpha


@given(interlace_cases())
def test_interlace_commutes_with_generation(case):
    spec, alpha = case
    lhs = interlace_points(generate_points(spec), alpha)
    rhs = generate_points(interlace_matrices(spec, alpha))
    assert lhs == rhs


# --- dual net --------------------------------------------------------------


def test_dual_examples():
    C = spec_from([[[1], [0], [0]]], 2)
    assert dual_contains(C, 0)
    assert dual_contains(C, 2) and not dual_contains(C, 1)
    I = spec_from([np.eye(2, dtype=int)], 2)
    assert dual_contains(I, 4) and not dual_contains(I, 1)
    assert dual_enumerate(C, NRT, 3) == [(2,), (4,), (6,)]
    assert dual_enumerate(C, NRT, 1) == []
    with pytest.raises(ShapeMismatch):
        dual_contains(C, (1, 2))


@given(random_specs(max_m=3, max_s=2), st.integers(1, 3))
def test_dual_enumerate_matches_brute_force(spec, alpha):
    b = spec.b
    w = WeightSpec(alpha)
    cutoff = 5 if b == 2 else 4
    kmax = b ** min(cutoff, 6)
    got = dual_enumerate(spec, w, cutoff)
    # coordinates of weight <= cutoff have at most `cutoff` digits
    brute = {k for k in brute_dual(spec.matrices, b, kmax) if any(k) and weight(k, w, b) <= cutoff}
    assert set(got) == brute
    assert got == sorted(got, key=lambda k: (weight(k, w, b), k))
    assert all(dual_contains(spec, k) for k in got)


@given(random_specs(max_m=3, max_s=2), st.integers(1, 2))
def test_dual_min_weight_matches_enumeration(spec, alpha):
    w = WeightSpec(alpha)
    mu, wit = dual_min_weight(spec, w)
    assert dual_contains(spec, wit) and any(wit)
    assert weight(wit, w, spec.b) == mu
    assert dual_enumerate(spec, w, mu - 1) == []


def test_dual_guard():
    spec = DigitalNetSpec(2, 6, 6, 6, niederreiter_matrices(2, 6, 6, 6))
    with pytest.raises(SearchSpaceTooLarge):
        dual_enumerate(spec, NRT, 14, guard=100)


@pytest.mark.parametrize("b,m,s", [(2, 3, 2), (2, 4, 3), (3, 2, 2), (3, 3, 1)])
def test_character_property_on_nets(b, m, s):
    spec = DigitalNetSpec(b, m, m, s, niederreiter_matrices(b, s, m, m))
    ps = generate_points(spec)
    for k in itertools.product(range(b**m), repeat=s):
        cs = character_sum(ps, k)
        assert cs == (ps.N if dual_contains(spec, k) else 0)


# --- files -----------------------------------------------------------------


@given(random_specs(bases=(2, 3, 5, 31), max_m=3, max_s=3))
def test_csv_round_trip(spec):
    ps = generate_points(spec)
    text = points_csv_text(ps, spec.m, ["note"])
    back, meta = read_points_csv(text)
    assert back == ps
    assert meta["b"] == spec.b and meta["m"] == spec.m and meta["comments"] == ["note"]
    buf = io.StringIO()
    write_points_csv(ps, buf, spec.m, ["note"])
    assert buf.getvalue() == text


def test_csv_errors():
    with pytest.raises(ValueError):
        read_points_csv("j1_digits,j1_float\n")
    with pytest.raises(ValueError):
        read_points_csv("# b=2 m=1 n=2 s=1\nj1_digits,j1_float\n0.1,0.5\n")
    with pytest.raises(ValueError):
        read_points_csv("# b=2 m=1 n=1 s=1\nj1_digits,j1_float\n0.2,0.5\n")


def test_spec_validation():
    with pytest.raises(ShapeMismatch):
        DigitalNetSpec(2, 2, 2, 1, np.zeros((1, 2, 3)))
    with pytest.raises(ShapeMismatch):
        DigitalNetSpec(2, 1, 1, 1, np.full((1, 1, 1), 2))
    a = DigitalNetSpec(2, 1, 1, 1, np.ones((1, 1, 1)))
    assert a == DigitalNetSpec.from_matrices(np.ones((1, 1)), 2)
    assert hash(a) == hash(DigitalNetSpec.from_matrices(np.ones((1, 1)), 2))
