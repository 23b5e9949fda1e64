import math
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meandiff.differences import DifferencePair
from meandiff.divergences import (
    AG_MEAN,
    ALL_EDGES,
    HELLINGER,
    J_DIVERGENCE,
    JENSEN_SHANNON,
    SYM_CHI_SQUARE,
    TRIANGULAR,
    Distribution,
    DivergenceKind,
    divergence,
    monte_carlo_audit,
    random_distribution,
    ratio_monotonicity_check,
    verify_divergence_chain,
)
from meandiff.errors import DomainError, InputError, ParseError

CLASSICAL = [JENSEN_SHANNON, J_DIVERGENCE, AG_MEAN, SYM_CHI_SQUARE, TRIANGULAR, HELLINGER]
KINDS = CLASSICAL + [DivergenceKind.mean_difference(DifferencePair.parse(t)) for t in ("A,G", "P5,N2", "P6,P1", "S,H")]

P0 = Distribution([0.5, 0.5])
Q0 = Distribution([0.25, 0.75])


@st.composite
def distribution_pairs(draw):
    n = draw(st.integers(2, 12))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_distribution(rng, n), random_distribution(rng, n)


def decimal_oracle(tag, P, Q):
    with localcontext() as ctx:
        ctx.prec = 50
        total = Decimal(0)
        for p, q in zip(P.probabilities, Q.probabilities):
            p, q = Decimal(float(p)), Decimal(float(q))
            a = (p + q) / 2
            if tag == "I":
                total += (p * (2 * p / (p + q)).ln() + q * (2 * q / (p + q)).ln()) / 2
            elif tag == "J":
                total += (p - q) * (p / q).ln()
            elif tag == "T":
                total += a * (a / (p * q).sqrt()).ln()
            elif tag == "Psi":
                total += (p - q) ** 2 * (p + q) / (p * q)
    return float(total)


class TestExamples:
    def test_psi(self):
        assert divergence(SYM_CHI_SQUARE, P0, Q0) == pytest.approx(7 / 12, rel=1e-15)

    def test_j(self):
        assert divergence(J_DIVERGENCE, P0, Q0) == pytest.approx(0.25 * math.log(3), rel=1e-15)

    def test_self(self):
        for k in KINDS:
            assert divergence(k, Q0, Q0) == 0.0


@pytest.mark.parametrize("tag", ["I", "J", "T", "Psi"])
def test_against_decimal_oracle(tag, rng):
    kind = DivergenceKind(tag)
    for scale in (1e-1, 1e-4, 1e-8):
        for _ in range(5):
            n = int(rng.integers(2, 20))
            p = random_distribution(rng, n).probabilities
            q = p * (1 + scale * rng.standard_normal(n))
            P, Q = Distribution(p), Distribution(q / q.sum())
            assert divergence(kind, P, Q) == pytest.approx(decimal_oracle(tag, P, Q), rel=1e-12)


@given(distribution_pairs(), st.sampled_from(KINDS))
def test_symmetry(pq, kind):
    P, Q = pq
    assert divergence(kind, P, Q) == pytest.approx(divergence(kind, Q, P), rel=1e-12, abs=1e-300)


@given(distribution_pairs(), st.sampled_from(KINDS))
def test_identity_of_indiscernibles(pq, kind):
    P, Q = pq
    assert abs(divergence(kind, P, P)) <= 1e-14
    if np.max(np.abs(P.probabilities - Q.probabilities)) > 1e-6:
        assert divergence(kind, P, Q) > 0


@given(distribution_pairs())
def test_delta_and_h_are_mean_differences(pq):
    P, Q = pq
    ah = DivergenceKind.parse("D(A,H)")
    ag = DivergenceKind.parse("D(A,G)")
    assert divergence(TRIANGULAR, P, Q) == pytest.approx(2 * divergence(ah, P, Q), rel=1e-12)
    assert divergence(HELLINGER, P, Q) == pytest.approx(divergence(ag, P, Q), rel=1e-12)


def test_block_additivity(rng):
    kind = DivergenceKind.parse("D(P6,N2)")
    p1, q1 = random_distribution(rng, 5).probabilities, random_distribution(rng, 5).probabilities
    p2, q2 = random_distribution(rng, 7).probabilities, random_distribution(rng, 7).probabilities
    w = 0.3
    P = Distribution(np.concatenate([w * p1, (1 - w) * p2]))
    Q = Distribution(np.concatenate([w * q1, (1 - w) * q2]))
    # homogeneity of degree one lets each block be evaluated on its own scale
    left = w * divergence(kind, Distribution(p1), Distribution(q1))
    right = (1 - w) * divergence(kind, Distribution(p2), Distribution(q2))
    assert divergence(kind, P, Q) == pytest.approx(left + right, rel=1e-12)


class TestDistribution:
    def test_rejects_zero_and_negative(self):
        with pytest.raises(DomainError):
            Distribution([0.0, 1.0])
        with pytest.raises(DomainError):
            Distribution.from_values([-0.1, 1.1])

    def test_rejects_unnormalised(self):
        with pytest.raises(DomainError):
            Distribution([0.5, 0.6])
        d = Distribution.from_values([1, 3], normalize=True)
        assert d == Distribution([0.25, 0.75]) and d.normalized

    def test_smoothing(self):
        d = Distribution.from_values([0.0, 1.0], smooth=True)
        assert d.smoothed and np.all(d.probabilities > 0)
        assert d.probabilities.sum() == pytest.approx(1.0, abs=1e-15)
        assert d.probabilities[0] == pytest.approx(1e-12 / (1 + 2e-12))

    def test_other_errors(self):
        for bad in ([], [float("nan"), 1.0]):
            with pytest.raises(InputError):
                Distribution(bad)
        with pytest.raises(InputError):
            Distribution([1.0], tolerance=-1)
        with pytest.raises(DomainError):
            Distribution.from_values([0, 0], normalize=True)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            divergence(J_DIVERGENCE, P0, Distribution([0.2, 0.3, 0.5]))

    def test_read_only(self):
        with pytest.raises(ValueError):
            P0.probabilities[0] = 0.9


def test_kind_parsing():
    assert DivergenceKind.parse("psi") == SYM_CHI_SQUARE
    assert DivergenceKind.parse("Hellinger") == HELLINGER
    assert DivergenceKind.parse("D(P5,G)").pair == DifferencePair.parse("P5,G")
    with pytest.raises(ParseError):
        DivergenceKind.parse("kl")
    with pytest.raises(InputError):
        DivergenceKind("D")
    with pytest.raises(InputError):
        DivergenceKind("I", DifferencePair.parse("A,G"))


class TestChain:
    def test_identical(self):
        report = verify_divergence_chain(Q0, Q0)
        assert report.passed
        assert all(v == 0 for _, v in report.terms)

    def test_example_has_positive_slack(self):
        report = verify_divergence_chain(P0, Q0)
        assert report.passed
        assert all(c.slack > 0 for c in report.comparisons)
        assert len(report.comparisons) == len(ALL_EDGES)

    def test_j_bound_uses_three_sixteenths(self):
        terms = dict(verify_divergence_chain(P0, Q0).terms)
        p5g = divergence(DivergenceKind.parse("D(P5,G)"), P0, Q0)
        assert terms["2/3 D(P5,G)"] == pytest.approx(2 / 3 * p5g)
        assert terms["1/8 J"] == pytest.approx(divergence(J_DIVERGENCE, P0, Q0) / 8)
        assert p5g <= 3 / 16 * divergence(J_DIVERGENCE, P0, Q0)

    def test_smoothed_flag_propagates(self):
        P = Distribution.from_values([0.0, 1.0], smooth=True)
        assert verify_divergence_chain(P, Q0).smoothed


def test_monte_carlo_small():
    report = monte_carlo_audit(pairs=500, seed=3)
    assert report.passed
    assert max(report.max_violation.values()) <= 1e-10
    assert monte_carlo_audit(pairs=50, seed=3).to_dict() == monte_carlo_audit(pairs=50, seed=3).to_dict()


def test_monte_carlo_matches_pairwise_verification():
    report = monte_carlo_audit(pairs=20, seed=11, n_range=(2, 6))
    rng = np.random.default_rng(11)
    sizes = rng.integers(2, 7, size=20)
    worst = {}
    for n in sizes:
        P, Q = random_distribution(rng, int(n)), random_distribution(rng, int(n))
        for c in verify_divergence_chain(P, Q).comparisons:
            key = f"{c.lhs} <= {c.rhs}"
            worst[key] = max(worst.get(key, -np.inf), c.violation)
    for key, v in worst.items():
        assert report.max_violation[key] == pytest.approx(v, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("which,limit", [("AP4_vs_I", Fraction(3, 2)), ("P5G_vs_J", Fraction(3, 16)), ("P5A_vs_T", Fraction(1, 2))])
def test_ratio_checks(which, limit):
    r = ratio_monotonicity_check(which)
    assert r.limit_rational == limit
    assert r.limit_at_one == pytest.approx(float(limit), rel=1e-8)
    assert r.sign_pattern_ok and r.derivative_agrees and r.passed


def test_ratio_check_errors():
    with pytest.raises(InputError):
        ratio_monotonicity_check("nope")
    with pytest.raises(InputError):
        ratio_monotonicity_check("AP4_vs_I", [0.5, 0.0])
