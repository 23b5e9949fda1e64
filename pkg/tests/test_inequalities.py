from fractions import Fraction
from unittest import mock

import numpy as np
import pytest

from meandiff import inequalities as ineq
from meandiff.differences import DifferencePair, difference_array
from meandiff.errors import DegenerateRatioError, InputError, ParseError, RationalizationError
from meandiff.inequalities import (
    PUBLISHED_BETAS,
    ChainEdge,
    InequalityChain,
    audit_chain,
    beta_constant,
    beta_table,
    builtin_chains,
    get_builtin_chain,
    parse_chains,
    rationalize,
    tightness_check,
)
from meandiff.means import MeanKind


def D(text):
    return DifferencePair.parse(text)


# f''(1) of every named generator: (r + s - 1)/4 on the Gini family, -1/16 for N2
# and -1/12 for N3.  The curvature of g_tp at 1 is the difference, so each beta
# below is an exact ratio worked out by hand from this table.
CURV = {
    "P1": Fraction(-3, 2), "P2": Fraction(-1), "P3": Fraction(-3, 4), "H": Fraction(-1, 2),
    "P4": Fraction(-3, 8), "G": Fraction(-1, 4), "N1": Fraction(-1, 8), "N3": Fraction(-1, 12),
    "N2": Fraction(-1, 16), "A": Fraction(0), "P5": Fraction(1, 8), "S": Fraction(1, 4),
    "P6": Fraction(1, 2),
}


def exact_beta(lhs: DifferencePair, rhs: DifferencePair) -> Fraction:
    def c(p):
        return CURV[p.upper.tag] - CURV[p.lower.tag]

    return c(lhs) / c(rhs)


class TestBetaExamples:
    def test_part5(self):
        assert beta_constant(D("A,H"), D("P6,N2")) == Fraction(8, 9)

    def test_part1(self):
        assert beta_constant(D("P6,P1"), D("P6,P2")) == Fraction(4, 3)

    def test_identity(self):
        for pair in (D("A,G"), D("S,H"), D("P6,P1")):
            assert beta_constant(pair, pair) == 1


@pytest.mark.parametrize("part", sorted(PUBLISHED_BETAS))
def test_beta_matches_exact_curvature_ratio(part):
    lhs, rhs, _ = PUBLISHED_BETAS[part]
    assert beta_constant(lhs, rhs) == exact_beta(lhs, rhs)


def test_printed_constants_differ_only_at_parts_7_and_10():
    mismatched = {r.part: r.beta for r in beta_table() if not r.matches}
    assert mismatched == {7: Fraction(4, 5), 10: Fraction(1)}


def test_part_22_and_35_resolutions():
    assert beta_constant(D("A,N2"), D("P5,G")) == Fraction(1, 6)
    assert beta_constant(D("P5,P1"), D("P6,P2")) == Fraction(13, 12)
    # the display's variant bounds D(P6,P1) instead; its sharp constant is 4/3
    assert beta_constant(D("P6,P1"), D("P6,P2")) == Fraction(4, 3)


def _worst(lhs, rhs, beta):
    xs = np.linspace(0.9, 1.1, 2001)
    xs = xs[xs != 1.0]
    v = (difference_array(lhs, xs, 1.0) - float(beta) * difference_array(rhs, xs, 1.0))
    v /= float(beta) * difference_array(rhs, xs, 1.0)
    return float(v.max())


def test_printed_constants_for_parts_7_and_10_are_refuted():
    assert _worst(D("A,H"), D("S,P4"), Fraction(2, 3)) > 0.19
    assert _worst(D("S,P4"), D("P6,N1"), Fraction(4, 5)) > 0.24
    assert _worst(D("A,H"), D("S,P4"), Fraction(4, 5)) <= 1e-12
    assert _worst(D("S,P4"), D("P6,N1"), Fraction(1)) <= 1e-12


def test_display_variant_of_part_35_is_refuted():
    assert _worst(D("P6,P1"), D("P6,P2"), Fraction(13, 12)) > 0.2
    assert _worst(D("P5,P1"), D("P6,P2"), Fraction(13, 12)) <= 1e-12


def test_degenerate_denominator():
    with mock.patch.object(ineq, "_g2", side_effect=[1.0, 0.0]):
        with pytest.raises(DegenerateRatioError):
            beta_constant(D("A,H"), D("A,G"))


def test_uncertified_pairs_use_generator_curvatures():
    assert beta_constant(D("S,H"), D("A,H")) == Fraction(3, 2)
    assert beta_constant(D("N2,G"), D("A,G")) == Fraction(3, 4)


class TestRationalize:
    def test_values(self):
        assert rationalize(0.75) == Fraction(3, 4)
        assert rationalize(13 / 12) == Fraction(13, 12)
        assert rationalize(-2.0) == Fraction(-2)

    def test_errors(self):
        with pytest.raises(RationalizationError):
            rationalize(np.pi)
        with pytest.raises(RationalizationError):
            rationalize(float("nan"))
        with pytest.raises(RationalizationError):
            rationalize(1 / 1009)


class TestBuiltinChains:
    def test_names(self):
        names = [c.name for c in builtin_chains()]
        assert names == ["mean-order", "classic", "thm31-43", "thm31-44", "thm31-45", "improvement"]

    def test_edge_counts(self):
        sizes = {c.name: len(c) for c in builtin_chains()}
        assert sizes["thm31-43"] == 26
        assert sizes["thm31-44"] == 8
        assert sizes["thm31-45"] == 9
        assert sizes["classic"] == 14

    def test_tagged_edges_realise_their_beta(self):
        table = {r.part: r.beta for r in beta_table()}
        seen = set()
        for chain in builtin_chains():
            for e in chain.edges:
                if e.part is not None:
                    seen.add(e.part)
                    lhs, rhs, _ = PUBLISHED_BETAS[e.part]
                    assert (e.lhs, e.rhs) == (lhs, rhs)
                    assert e.beta == table[e.part], e.label
        assert seen == set(range(1, 42))

    def test_unknown(self):
        with pytest.raises(KeyError):
            get_builtin_chain("nope")

    def test_chains_are_acyclic_and_ordered(self):
        for chain in builtin_chains():
            for e in chain.edges:
                for t in (e.lhs, e.rhs):
                    assert isinstance(t, (DifferencePair, MeanKind))


@pytest.mark.parametrize("name", ["classic", "mean-order", "thm31-43", "thm31-44", "thm31-45", "improvement"])
def test_builtin_chain_passes_small_audit(name):
    report = audit_chain(get_builtin_chain(name), samples=5000, seed=1)
    assert report.passed, [f.to_dict() for f in report.failures()]
    assert report.max_violation <= 1e-10


def test_audit_example_seed_42():
    report = audit_chain(get_builtin_chain("thm31-43"), samples=100_000, seed=42)
    assert report.passed and report.max_violation <= 1e-10


def test_reversed_edge_fails_with_witness():
    chain = parse_chains("chain bad\nD(A,G) <= 1/2 D(A,H)\n")[0]
    report = audit_chain(chain, samples=2000, seed=0)
    assert not report.passed
    (row,) = report.failures()
    x, b = row.witness
    lhs, rhs = chain.edges[0].sides(x, b)
    assert lhs > rhs and row.max_violation > 0
    # the documented witness (1, 100)
    lhs, rhs = chain.edges[0].sides(1.0, 100.0)
    assert lhs > rhs


def test_reversing_any_strict_edge_fails():
    chain = get_builtin_chain("thm31-43")
    flipped = InequalityChain("flipped", tuple(e.reversed() for e in chain.edges[:5]))
    report = audit_chain(flipped, samples=2000, seed=3)
    assert len(report.failures()) == 5


def test_equal_arguments_give_no_violation():
    chain = get_builtin_chain("thm31-43")
    for e in chain.edges:
        lhs, rhs = e.sides(np.array([1.0]), 1.0)
        assert lhs[0] == 0.0 and rhs[0] == 0.0


def test_audit_is_deterministic():
    chain = get_builtin_chain("classic")
    a = audit_chain(chain, samples=3000, seed=9).to_dict()
    b = audit_chain(chain, samples=3000, seed=9).to_dict()
    assert a == b
    assert a["sampler"]["seed"] == 9 and a["samples"] == 3000


def test_audit_validation():
    chain = get_builtin_chain("classic")
    with pytest.raises(InputError):
        audit_chain(chain, samples=0)
    with pytest.raises(InputError):
        audit_chain(chain, range=(1.0, 0.5))
    with pytest.raises(InputError):
        audit_chain(chain, tolerance=-1)
    with pytest.raises(InputError):
        audit_chain(chain, xs=[1.0, -2.0])
    with pytest.raises(InputError):
        audit_chain(InequalityChain("empty", ()))


def test_transitivity_spot_check(rng):
    xs = np.exp(rng.uniform(np.log(1e-6), np.log(1e6), 20000))
    for chain in builtin_chains():
        if chain.name == "mean-order":
            continue
        by_lhs = {}
        for e in chain.edges:
            by_lhs.setdefault((e.lhs_coeff, e.lhs), []).append(e)
        for first in chain.edges:
            for second in by_lhs.get((first.rhs_coeff, first.rhs), []):
                direct = ChainEdge(first.lhs_coeff, first.lhs, second.rhs_coeff, second.rhs)
                lhs, rhs = direct.sides(xs)
                assert np.all(lhs <= rhs * (1 + 1e-10)), direct.label


class TestParsing:
    def test_multi_term_line(self):
        (chain,) = parse_chains("chain c\nD(S,A) <= 1/3 D(S,H) <= 1/2 D(A,H)\n")
        assert len(chain) == 2
        assert chain.edges[1].lhs_coeff == Fraction(1, 3)
        assert all(e.part is None for e in chain.edges)

    def test_headerless_document_and_comments(self):
        (chain,) = parse_chains("# c\n\n2 D(A,G) <= 8 D(A,N2)  # trailing\n", source="dir/my.chain")
        assert chain.name == "my" and chain.edges[0].beta == 4

    def test_means(self):
        (chain,) = parse_chains("M(G) <= M(gini:1:0)")
        assert chain.edges[0].rhs == MeanKind.gini(1, 0)

    @pytest.mark.parametrize(
        "text",
        [
            "chain\nD(A,G) <= D(A,H)",
            "D(A,G) D(A,H)",
            "D(A,G) <= D(Q,H)",
            "D(G,A) <= D(A,H)",
            "0 D(A,G) <= D(A,H)",
            "D(A,G) <= M(A)",
            "D(A,G) <= D(A,H) @x",
            "chain empty\n",
            "",
        ],
    )
    def test_errors(self, text):
        with pytest.raises(ParseError):
            parse_chains(text)

    def test_cycle(self):
        with pytest.raises(ParseError):
            parse_chains("D(A,G) <= D(A,H)\nD(A,H) <= D(A,G)\n")

    def test_label_round_trip(self):
        for chain in builtin_chains():
            text = "\n".join(e.label for e in chain.edges)
            (again,) = parse_chains(text)
            assert again.edges == chain.edges


class TestTightness:
    def test_examples(self):
        edge = ChainEdge(1, D("A,H"), Fraction(8, 9), D("P6,N2"))
        r = tightness_check(edge)
        assert r.ratio_at_one == pytest.approx(8 / 9, abs=1e-12)
        assert r.passed
        edge = ChainEdge(1, D("P6,S"), 1, D("A,G"))
        r = tightness_check(edge)
        assert r.ratio_at_one == pytest.approx(1.0, abs=1e-12) and r.passed

    def test_identity_edge_is_constant(self):
        edge = ChainEdge(1, D("P6,A"), 1, D("A,H"))
        r = tightness_check(edge)
        assert r.max_ratio == pytest.approx(1.0, abs=1e-12) and r.bounded_on_grid

    def test_wrong_constant_not_sharp(self):
        r = tightness_check(ChainEdge(1, D("A,H"), Fraction(2, 3), D("S,P4")))
        assert not r.passed and r.ratio_at_one == pytest.approx(0.8, abs=1e-12)

    def test_every_tagged_edge_is_sharp(self):
        for chain in builtin_chains():
            for e in chain.edges:
                if e.part is not None:
                    assert tightness_check(e).passed, e.label

    def test_grid_validation(self):
        edge = ChainEdge(1, D("A,H"), Fraction(8, 9), D("P6,N2"))
        with pytest.raises(InputError):
            tightness_check(edge, [1.0, 0.0])
        with pytest.raises(InputError):
            tightness_check(ChainEdge(1, MeanKind("G"), 1, MeanKind("A")))


def test_edge_validation():
    with pytest.raises(InputError):
        ChainEdge(0, D("A,G"), 1, D("A,H"))
    with pytest.raises(InputError):
        ChainEdge("x", D("A,G"), 1, D("A,H"))
    with pytest.raises(InputError):
        ChainEdge(1, D("A,G"), 1, MeanKind("A"))
