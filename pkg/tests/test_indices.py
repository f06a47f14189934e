import pytest
from hypothesis import given, settings, strategies as st

from mzvohno.errors import DomainError, ParseError
from mzvohno.indices import (Composition, Index, PairComposition, as_pair_composition, dual,
                             enumerate_admissible, enumerate_compositions,
                             enumerate_pair_compositions, kappa, kappa_inv, normalize,
                             parse_index, parse_pair_composition, precedes, strictly_precedes)


def C(*parts):
    return Composition(parts)


def I(*parts):
    return Index(parts)


class TestNormalize:
    def test_examples(self):
        assert normalize((3, 0, 2, 0, 4)) == C(9)
        assert normalize((3, 0, 2, 1, 0, 0, 4)) == C(5, 1, 4)
        assert normalize((5, 1, 4)) == C(5, 1, 4)

    def test_boundary_and_empty(self):
        assert normalize((0, 3, 1)) == C(3, 1)
        assert normalize((3, 1, 0)) == C(3, 1)
        assert normalize((0,)) == C()
        assert normalize((0, 0, 0)) == C()
        assert normalize(()) == C()

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            normalize((1, -1))

    @given(st.lists(st.integers(0, 3), max_size=8))
    def test_idempotent_and_weight(self, raw):
        c = normalize(raw)
        assert normalize(c.parts) == c
        # odd zero runs merge, even runs drop, so weight is always kept
        assert c.weight == sum(raw)


class TestPrecedes:
    def test_examples(self):
        assert precedes((4, 1, 3), (5, 1, 4))
        assert precedes((9,), (5, 1, 4))  # (5,0,4) normalizes to (9)
        assert precedes((5, 1, 4), (5, 1, 4))
        assert not strictly_precedes((5, 1, 4), (5, 1, 4))
        assert strictly_precedes((4, 1, 3), (5, 1, 4))

    def test_heavier_never_precedes(self):
        assert not precedes((6, 1, 4), (5, 1, 4))
        assert not precedes((2, 2), (3,))

    def test_string_arguments(self):
        assert precedes("(1,2)", "(2,3)")


class TestKappa:
    def test_kappa_examples(self):
        assert kappa(((1, 1),)) == I(2)
        assert kappa(((2, 2),)) == I(3, 1)
        assert kappa(((2, 1), (1, 2))) == I(3, 2, 1)

    def test_inverse_examples(self):
        assert kappa_inv((2,)) == PairComposition(((1, 1),))
        assert kappa_inv((3, 1)) == PairComposition(((2, 2),))
        assert kappa_inv((2, 1, 1)) == PairComposition(((1, 3),))

    def test_inverse_rejects(self):
        with pytest.raises(DomainError):
            kappa_inv((1, 2))
        with pytest.raises(DomainError):
            kappa_inv(())

    def test_kappa_result_admissible(self):
        for w in range(2, 9):
            for pc in enumerate_pair_compositions(w):
                assert kappa(pc).admissible


class TestDual:
    def test_examples(self):
        assert dual(()) == I()
        assert dual((2,)) == I(2)
        assert dual((3,)) == I(2, 1)
        assert dual((4,)) == I(2, 1, 1)
        assert dual((3, 1, 2)) == I(2, 3, 1)

    def test_non_admissible(self):
        with pytest.raises(DomainError):
            dual((1, 2))

    @settings(max_examples=200)
    @given(st.lists(st.integers(1, 4), min_size=1, max_size=6).map(lambda t: (t[0] + 1, *t[1:])))
    def test_involution_random(self, k):
        assert dual(dual(k)) == Index(k)
        assert dual(k).weight == sum(k)


class TestEnumeration:
    def test_compositions(self):
        assert enumerate_compositions(1) == [C(1)]
        assert enumerate_compositions(3) == [C(3), C(2, 1), C(1, 2), C(1, 1, 1)]
        assert enumerate_compositions(3, 2) == [C(2, 1), C(1, 2)]
        assert enumerate_compositions(0) == [C()]

    @pytest.mark.parametrize("k", range(1, 11))
    def test_composition_count(self, k):
        assert len(enumerate_compositions(k)) == 2 ** (k - 1)

    def test_pair_compositions(self):
        assert enumerate_pair_compositions(2) == [PairComposition(((1, 1),))]
        assert enumerate_pair_compositions(3) == [PairComposition(((2, 1),)),
                                                  PairComposition(((1, 2),))]
        w4 = enumerate_pair_compositions(4)
        # four, not five: brute force over all even-length compositions of 4
        assert set(w4) == {PairComposition(((3, 1),)), PairComposition(((2, 2),)),
                           PairComposition(((1, 3),)), PairComposition(((1, 1), (1, 1)))}

    def test_pair_composition_counts_match_admissible(self):
        # kappa is a bijection onto admissible indices of the same weight
        for w in range(2, 11):
            assert len(enumerate_pair_compositions(w)) == len(enumerate_admissible(w)) == 2 ** (w - 2)


class TestParsing:
    def test_index(self):
        assert parse_index("(3,1)") == I(3, 1)
        assert parse_index(" ( 3 , 1 ) ") == I(3, 1)
        assert parse_index("()") == I()
        assert parse_index("∅") == I()

    def test_pair_composition(self):
        assert parse_pair_composition("((2,1),(1,2))") == PairComposition(((2, 1), (1, 2)))
        assert parse_pair_composition("(2,1,1,2)") == PairComposition(((2, 1), (1, 2)))
        assert as_pair_composition((2, 2)) == PairComposition(((2, 2),))

    @pytest.mark.parametrize("bad", ["(3", "3,1", "(a)", "(1,,2)", "((1,2),(3))"])
    def test_errors(self, bad):
        with pytest.raises(ParseError):
            parse_pair_composition(bad) if bad.startswith("((") else parse_index(bad)

    def test_odd_flat_pair_composition(self):
        with pytest.raises(ParseError):
            parse_pair_composition("(1,2,3)")

    def test_printing_round_trip(self):
        pc = PairComposition(((2, 1), (1, 2)))
        assert parse_pair_composition(str(pc)) == pc
        assert pc.short() == "2,1,1,2"
        assert str(I(3, 1)) == "(3,1)"


def test_value_types_are_hashable_and_structural():
    assert {I(2, 1), I(2, 1)} == {I(2, 1)}
    assert PairComposition(((1, 1),)).prefix_sums == (0, 1)
    assert PairComposition(((2, 3), (1, 2))).prefix_sums == (0, 3, 5)
