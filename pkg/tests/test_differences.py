import math
from decimal import Decimal, localcontext

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meandiff import means as m
from meandiff.differences import (
    CERTIFIED_PAIRS,
    DifferencePair,
    VkKind,
    _generator_decimal,
    difference,
    difference_array,
    generator_difference,
    phi_transform,
    second_derivative,
    second_derivative_closed,
    second_derivative_fd,
    vk_measure,
)
from meandiff.errors import InputError, ParseError, UnsupportedPairError
from meandiff.inequalities import default_grid

positive = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)
certified = st.sampled_from(CERTIFIED_PAIRS)

# Every pair ordered by the joint chain, certified or not.
ORDERED = [
    DifferencePair(u, l)
    for i, l in enumerate(m.NAMED_KINDS)
    for u in m.NAMED_KINDS[i + 1 :]
    if m.is_below(l, u)
]
ordered = st.sampled_from(ORDERED)


def D(u, l):
    return DifferencePair(u, l)


class TestExamples:
    def test_difference(self):
        assert difference(D("A", "G"), (1, 1)) == 0.0
        assert difference(D("A", "G"), (1, 4)) == pytest.approx(0.5, rel=1e-15)

    def test_generator_difference(self):
        assert generator_difference(D("A", "H"), 1) == 0.0
        assert generator_difference(D("A", "H"), 3) == pytest.approx(0.5, rel=1e-15)

    def test_closed_forms(self):
        assert second_derivative_closed(D("A", "G"), 1) == pytest.approx(0.25, rel=1e-15)
        assert second_derivative_closed(D("A", "H"), 1) == pytest.approx(0.5, rel=1e-15)
        for x in (0.5, 1.0, 2.0):
            closed = second_derivative_closed(D("P6", "G"), x)
            assert closed == pytest.approx(second_derivative_fd(D("P6", "G"), x), rel=1e-6)

    def test_fd(self):
        assert second_derivative_fd(D("A", "G"), 1, 1e-4) == pytest.approx(0.25, abs=1e-6)
        assert second_derivative_fd(D("A", "H"), 2, 1e-4) == pytest.approx(4 / 27, abs=1e-6)
        assert second_derivative_fd(D("S", "A"), 1, 1e-4) == pytest.approx(0.25, abs=1e-6)

    def test_phi(self):
        assert phi_transform(D("A", "G"), (1, 1)) == 0.0
        assert phi_transform(lambda x: (math.sqrt(x) - 1) ** 2 / 2, (1, 4)) == pytest.approx(0.5)

    def test_vk(self):
        assert vk_measure(2, (1, 1)) == 0.0
        assert vk_measure(2, (4, 1)) == pytest.approx(0.2, rel=1e-15)
        assert vk_measure(1, (2, 1)) == pytest.approx(0.2, rel=1e-15)


def test_exactly_27_certified_pairs():
    assert len(CERTIFIED_PAIRS) == 27
    assert len(set(CERTIFIED_PAIRS)) == 27
    assert all(p.has_certificate for p in CERTIFIED_PAIRS)
    assert not D("S", "H").has_certificate
    assert not D("N2", "G").has_certificate


def test_reversed_and_incomparable_pairs_rejected():
    with pytest.raises(InputError):
        D("G", "A")
    with pytest.raises(InputError):
        D("S", "P5")
    with pytest.raises(InputError):
        D("A", "A")


def test_parametric_spelling_is_canonical():
    pair = DifferencePair(m.MeanKind.power(1), m.MeanKind.lehmer(0.5))
    assert pair == D("A", "G") and pair.has_certificate


def test_parse():
    assert DifferencePair.parse("D(A,G)") == D("A", "G")
    assert DifferencePair.parse("p6, n2") == D("P6", "N2")
    assert DifferencePair.parse("S-A") == D("S", "A")
    for bad in ["AG", "D(A,Q)", "D(G,A)"]:
        with pytest.raises(ParseError):
            DifferencePair.parse(bad)


def test_uncertified_closed_form_is_unsupported():
    with pytest.raises(UnsupportedPairError):
        second_derivative_closed(D("S", "H"), 2.0)
    assert second_derivative(D("S", "H"), 1.0) == pytest.approx(0.75, abs=1e-15)


@pytest.mark.parametrize("pair", CERTIFIED_PAIRS, ids=lambda p: p.label)
def test_certificate_nonnegative_and_matches_oracle(pair):
    grid = default_grid()
    closed = second_derivative_closed(pair, grid)
    assert np.all(closed >= -1e-12)
    for x, c in zip(grid, closed):
        fd = second_derivative_fd(pair, float(x))
        assert abs(c - fd) <= max(1e-6, 1e-4 * abs(c)), (pair.label, x, c, fd)


@pytest.mark.parametrize("pair", CERTIFIED_PAIRS, ids=lambda p: p.label)
def test_vector_and_scalar_closed_forms_agree(pair):
    xs = np.array([0.01, 0.7, 1.0, 3.0, 500.0])
    vec = second_derivative_closed(pair, xs)
    for x, v in zip(xs, vec):
        assert second_derivative_closed(pair, float(x)) == pytest.approx(v, rel=1e-15)


def test_fd_step_validation():
    with pytest.raises(InputError):
        second_derivative_fd(D("A", "G"), 1.0, 0.6)
    with pytest.raises(InputError):
        second_derivative_fd(D("A", "G"), 1.0, 0.0)
    with pytest.raises(InputError):
        second_derivative_fd(D("A", "G"), -1.0)
    with pytest.raises(InputError):
        second_derivative_closed(D("A", "G"), np.array([1.0, -2.0]))


def _pairs(rng, n=2000):
    a = np.exp(rng.uniform(-12, 12, n))
    b = np.exp(rng.uniform(-12, 12, n))
    return a, b


def test_identity_set_one(rng):
    a, b = _pairs(rng)
    p6a = difference_array(D("P6", "A"), a, b)
    ah = difference_array(D("A", "H"), a, b)
    p6h = difference_array(D("P6", "H"), a, b)
    assert np.allclose(p6a, ah, rtol=1e-12, atol=0)
    assert np.allclose(p6a, 0.5 * p6h, rtol=1e-12, atol=0)


def test_identity_set_two(rng):
    a, b = _pairs(rng)
    an3 = difference_array(D("A", "N3"), a, b)
    e2 = (np.sqrt(a) - np.sqrt(b)) ** 2
    assert np.allclose(difference_array(D("P5", "P4"), a, b), 6 * an3, rtol=1e-12, atol=0)
    assert np.allclose(6 * an3, e2, rtol=1e-9, atol=0)
    for pair, factor in [
        (D("A", "N1"), 2 / 3),
        (D("A", "G"), 1 / 3),
        (D("N3", "N1"), 2),
        (D("N3", "G"), 1 / 2),
        (D("N1", "G"), 2 / 3),
    ]:
        assert np.allclose(an3, factor * difference_array(pair, a, b), rtol=1e-12, atol=0), pair.label


def test_printed_identity_orderings_are_false():
    # the displayed orderings D_P6A = D_P6H and D_P5P4 = D_AN3 fail at (4, 1)
    assert difference(D("P6", "A"), (4, 1)) != pytest.approx(difference(D("P6", "H"), (4, 1)))
    assert difference(D("P5", "P4"), (4, 1)) != pytest.approx(difference(D("A", "N3"), (4, 1)))


@given(ordered, positive, positive)
def test_nonnegativity(pair, a, b):
    assert difference(pair, (a, b)) >= 0.0


@given(ordered, positive)
def test_zero_at_diagonal(pair, a):
    assert abs(difference(pair, (a, a))) <= 1e-14 * a


pow2 = st.integers(-20, 20).map(lambda k: 2.0**k)


# b is a power of two so that a/b is exact; otherwise the rounding of a/b
# alone moves g by about eps/|a/b - 1| relative near the diagonal.
@given(ordered, positive, pow2)
def test_generator_consistency(pair, a, b):
    d = difference(pair, (a, b))
    g = b * generator_difference(pair, a / b)
    assert d == pytest.approx(g, rel=1e-12, abs=1e-300)


@given(ordered, positive, positive)
def test_symmetric_in_arguments(pair, a, b):
    assert difference(pair, (a, b)) == pytest.approx(difference(pair, (b, a)), rel=1e-12, abs=1e-300)


@given(certified, positive, positive)
def test_tangent_bound(pair, a, b):
    assert phi_transform(pair, (a, b)) >= 0.0


@given(
    certified,
    st.tuples(positive, positive),
    st.tuples(positive, positive),
)
def test_phi_is_jointly_midpoint_convex(pair, p1, p2):
    mid = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
    lhs = phi_transform(pair, mid)
    rhs = 0.5 * (phi_transform(pair, p1) + phi_transform(pair, p2))
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_stable_difference_matches_decimal():
    xs = [1 + 1e-9, 1 - 1e-6, 1.01, 0.3, 7.0, 1e-5, 1e5]
    for pair in ORDERED:
        for x in xs:
            with localcontext() as ctx:
                ctx.prec = 50
                xd = Decimal(x)
                exact = float(_generator_decimal(pair.upper, xd) - _generator_decimal(pair.lower, xd))
            got = generator_difference(pair, x)
            assert abs(got - exact) <= 1e-14 * abs(exact), (pair.label, x, got, exact)


@given(st.integers(1, 4), positive, positive, pow2)
def test_vk_homogeneous_and_nonnegative(k, a, b, lam):
    v = vk_measure(k, (a, b))
    assert v >= 0.0
    assert vk_measure(k, (lam * a, lam * b)) == pytest.approx(lam * v, rel=1e-11, abs=1e-300)


def test_vk_matches_direct_generators():
    f = {
        1: lambda x: (x + 1) ** 2 * (x - 1) ** 4 / ((x**3 + 1) * (x**2 + 1)),
        2: lambda x: (math.sqrt(x) - 1) ** 2 / (x + 1),
        3: lambda x: math.sqrt(x) * (math.sqrt(x) - 1) ** 4 / ((x + 1) * (math.sqrt(x) + 1) ** 2),
        4: lambda x: (math.sqrt(x) - 1) ** 4 * (x - math.sqrt(x) + 1) / (12 * (x + 1)),
    }
    for k, fk in f.items():
        for x in [0.2, 3.0, 9.0]:
            assert vk_measure(k, (x, 1)) == pytest.approx(fk(x), rel=1e-13)


def test_vk_index_validation():
    for bad in (0, 5, 2.0, True):
        with pytest.raises(InputError):
            VkKind(bad)
