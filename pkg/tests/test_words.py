import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mswavelab.words import (
    Generator,
    OperatorWord,
    WordError,
    enumerate_words,
    nkappa_index_set,
    rotation_pairs,
)

from oracles import brute_force_index_count


class TestGenerators:
    def test_rotation_index_order(self):
        with pytest.raises(WordError):
            Generator.rotation(2, 1)
        with pytest.raises(WordError):
            Generator.scaled_lorentz(1, -1.0)

    def test_dimension_validation(self):
        w = OperatorWord(2, (Generator.space(2),))
        assert w.order == 1
        with pytest.raises(WordError):
            OperatorWord(2, (Generator.space(3),))
        with pytest.raises(WordError):
            OperatorWord(2, (Generator.rotation(1, 3),))


class TestEnumeration:
    def test_kappa_one_is_empty_word(self):
        words = enumerate_words(2, 1)
        assert len(words) == 1
        assert words[0].order == 0

    def test_kappa_two_2d_has_five_words(self):
        words = enumerate_words(2, 2)
        texts = {w.to_text() for w in words}
        assert texts == {"1", "d1", "d2", "O12", "S"}

    @pytest.mark.parametrize("dim,kappa", [(2, 3), (2, 4), (3, 2), (3, 3), (3, 4)])
    def test_counts_match_brute_force(self, dim, kappa):
        assert len(nkappa_index_set(dim, kappa)) == brute_force_index_count(dim, kappa)

    def test_n3_kappa4_count_frozen(self):
        # frozen from the combinatorial brute-force oracle
        assert len(nkappa_index_set(3, 4)) == 112
        assert len(nkappa_index_set(2, 4)) == 30

    def test_constraints_hold(self):
        for w in enumerate_words(3, 4):
            assert w.s_count <= 1
            assert w.order <= 3
            assert w.is_energy_admissible

    def test_no_duplicates(self):
        words = enumerate_words(3, 4)
        keys = {w.multi_index() for w in words}
        assert len(keys) == len(words)


class TestTextRoundTrip:
    @pytest.mark.parametrize("text", ["1", "d1 d1 O12 S", "dt d2", "L1", "Lt2@2.0 S"])
    def test_round_trip(self, text):
        w = OperatorWord.from_text(2, text)
        assert OperatorWord.from_text(2, w.to_text()).gens == w.gens

    def test_parse_rejects_garbage(self):
        with pytest.raises(WordError):
            OperatorWord.from_text(2, "Q7")

    def test_canonical_multi_index_round_trip(self):
        w = OperatorWord.from_multi_index(3, (2, 0, 1), (0, 1, 0), 1)
        a, b, d = w.multi_index()
        assert (a, b, d) == ((2, 0, 1), (0, 1, 0), 1)
        assert w.to_text() == "d1 d1 d3 O13 S"

    def test_non_canonical_word_rejects_multi_index(self):
        w = OperatorWord.from_text(2, "S d1")
        assert not w.is_energy_admissible
        with pytest.raises(WordError):
            w.multi_index()


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=2, max_value=3),
    st.lists(st.sampled_from(["d1", "d2", "O12", "S"]), max_size=4),
)
def test_all_text_words_round_trip(dim, tokens):
    text = " ".join(tokens)
    w = OperatorWord.from_text(dim, text)
    again = OperatorWord.from_text(dim, w.to_text())
    assert again.gens == w.gens
    assert again.order == len(tokens)


def test_rotation_pairs():
    assert rotation_pairs(2) == ((1, 2),)
    assert rotation_pairs(3) == ((1, 2), (1, 3), (2, 3))
