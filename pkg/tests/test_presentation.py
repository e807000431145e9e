import pytest
from hypothesis import given, strategies as st

from cofill.presentation import (
    ParseError,
    Presentation,
    PresentationError,
    canonical_cyclic,
    concat,
    cyclic_reduce,
    free_reduce,
    invert,
    parse_presentation,
)

letters = st.integers(min_value=-3, max_value=3).filter(lambda x: x != 0)
words = st.lists(letters, max_size=24).map(tuple)


def test_parse_basic():
    pres = parse_presentation("gens a b ; rels a b a^-1 b^-1")
    assert pres.generators == ("a", "b")
    assert pres.relators == ((1, 2, -1, -2),)


def test_parse_empty_relator_rejected():
    with pytest.raises(ParseError, match="empty after reduction"):
        parse_presentation("gens a ; rels a a^-1")


def test_parse_cyclic_reduction():
    # b a b a^-1 b^-1 b^-1 reduces cyclically to the commutator
    pres = parse_presentation("gens a b ; rels b a b a^-1 b^-1 b^-1")
    assert pres.relators == ((1, 2, -1, -2),)


def test_parse_multiline_and_comments():
    text = """
    # a sample presentation
    gens a b   # generators
    rels a b a^-1 b^-1 ; a^2 b^-1 a^-2 b
    """
    pres = parse_presentation(text)
    assert len(pres.relators) == 2


def test_parse_exponents():
    pres = parse_presentation("gens a b ; rels a^3 b a^-3 b^-1")
    assert pres.relators[0] == (1, 1, 1, 2, -1, -1, -1, -2)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError, match="line 1"):
        parse_presentation("gens a ; rels a q a")
    with pytest.raises(ParseError):
        parse_presentation("gens a a ; rels a")
    with pytest.raises(ParseError, match="exponent"):
        parse_presentation("gens a ; rels a^9999999")


def test_duplicate_gens_statement_rejected():
    with pytest.raises(ParseError):
        parse_presentation("gens a ; gens b ; rels a")


def test_presentation_invariants():
    with pytest.raises(PresentationError):
        Presentation(("a",), ((1, -1),))  # not reduced
    with pytest.raises(PresentationError):
        Presentation(("a", "b"), ((1, 2, -1),))  # not cyclically reduced
    with pytest.raises(PresentationError):
        Presentation(("a", "a"))


def test_word_algebra_examples():
    assert free_reduce((1, -1, 2)) == (2,)
    assert invert((1, 2)) == (-2, -1)
    assert cyclic_reduce((2, 1, -2)) == (1,)


@given(words)
def test_free_reduce_idempotent(w):
    assert free_reduce(free_reduce(w)) == free_reduce(w)


@given(words)
def test_word_times_inverse_cancels(w):
    assert free_reduce(concat(free_reduce(w), invert(free_reduce(w)))) == ()


@given(words, words)
def test_concat_matches_full_reduction(u, v):
    assert concat(free_reduce(u), free_reduce(v)) == free_reduce(tuple(u) + tuple(v))


@given(words)
def test_cyclic_reduce_is_cyclically_reduced(w):
    core = cyclic_reduce(w)
    if len(core) >= 2:
        assert core[0] != -core[-1]


@given(words)
def test_canonical_cyclic_invariance(w):
    w = cyclic_reduce(w)
    key = canonical_cyclic(w)
    for k in range(len(w)):
        assert canonical_cyclic(w[k:] + w[:k]) == key
    assert canonical_cyclic(invert(w)) == key


def test_word_str_round_trip():
    pres = parse_presentation("gens a b ; rels a b a^-1 b^-1")
    word = (1, 1, 2, -1, -1, -2, -2)
    assert pres.parse_word(pres.word_str(word)) == word
    assert pres.word_str(word) == "a^2 b a^-2 b^-2"
    assert pres.word_str(()) == ""
