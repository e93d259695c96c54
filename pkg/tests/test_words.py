import pytest
from hypothesis import given
from hypothesis import strategies as st

from gogconj.words import (
    Alphabet,
    OrientationCharacter,
    Word,
    WordError,
    character_parity,
    free_reduce,
    rewrite_into_index2_alphabet,
)

S = Alphabet(("a", "b", "t"))
OMEGA = OrientationCharacter.from_dict(S, {"t": -1})

letters = st.tuples(st.integers(0, 2), st.sampled_from([1, -1]))
words = st.lists(letters, max_size=20).map(lambda ls: Word(S, tuple(ls)))


@pytest.mark.parametrize("text, expected", [("a a^-1", "1"), ("", "1"), ("a b b^-1 a", "a a")])
def test_free_reduce_examples(text, expected):
    assert str(free_reduce(S.parse(text))) == expected


def test_free_reduce_rejects_mixed_alphabets():
    other = Alphabet(("a",))
    with pytest.raises(WordError):
        S.parse("a") * other.parse("a")


@pytest.mark.parametrize("text, parity", [("t", -1), ("t t", 1), ("a a a", 1)])
def test_character_parity_examples(text, parity):
    assert character_parity(OMEGA, S.parse(text)) == parity


def test_character_parity_alphabet_mismatch():
    with pytest.raises(WordError):
        character_parity(OMEGA, Alphabet(("t",)).parse("t"))


def test_word_serialization_round_trip():
    w = S.parse("a b^-1 t")
    assert str(w) == "a b^-1 t"
    assert S.parse(str(w)) == w
    assert str(S.parse("1")) == "1"
    assert S.parse("a^-2") == S.parse("a^-1 a^-1")


@pytest.mark.parametrize("text, expected", [("a", "[a]"), ("t t", "[tt]"), ("t a t", "[t a t^-1][tt]")])
def test_rewrite_examples(text, expected):
    sym, target = rewrite_into_index2_alphabet(OMEGA, S.parse(text))
    assert target.format(sym) == expected


def test_rewrite_rejects_odd_parity():
    with pytest.raises(WordError, match="not in the subgroup"):
        rewrite_into_index2_alphabet(OMEGA, S.parse("t a"))


def test_index2_alphabet_is_lazy():
    sym, target = rewrite_into_index2_alphabet(OMEGA, S.parse("a a a^-1"))
    assert len(target) == 1
    assert sym == ((0, 1), (0, 1), (0, -1))


@given(words, words)
def test_parity_is_multiplicative(u, v):
    assert character_parity(OMEGA, u * v) == character_parity(OMEGA, u) * character_parity(OMEGA, v)


@given(words)
def test_free_reduce_is_reduced_and_idempotent(w):
    r = free_reduce(w)
    assert all(r.letters[i] != (r.letters[i + 1][0], -r.letters[i + 1][1]) for i in range(len(r) - 1))
    assert free_reduce(r) == r
    assert free_reduce(w * w.inverse()) == Word(S)


@given(words)
def test_rewrite_expands_back_and_is_linear(w):
    if character_parity(OMEGA, w) == -1:
        w = w * S.parse("t")
    sym, target = rewrite_into_index2_alphabet(OMEGA, w)
    expanded = target.expand(sym)
    assert free_reduce(expanded) == free_reduce(w)
    assert len(expanded) <= 3 * len(w)
    assert all(character_parity(OMEGA, Word(S, target.expansions[k])) == 1 for k, _ in sym)
