import math

import pytest
from hypothesis import given, strategies as st

from dehnlab.core import (D, E, S, BlockPartition, IntegerMatrix, Letter, Word, WordFormatError,
                          commutator, evaluate, format_word, in_block_group, in_parabolic,
                          minimal_parabolic, norm2, norm_inf, parse_word)


def letters(p):
    idx = st.tuples(st.integers(1, p), st.integers(1, p)).filter(lambda t: t[0] != t[1])
    e = st.builds(lambda ij, s: E(ij[0], ij[1], s), idx, st.sampled_from([1, -1]))
    s = st.builds(lambda ij, x, s: Letter("S", ij[0], ij[1], x, (), s), idx,
                  st.integers(-10**6, 10**6).filter(bool), st.sampled_from([1, -1]))
    return st.one_of(e, s)


def words(p, max_size=12):
    return st.lists(letters(p), max_size=max_size).map(lambda ls: Word(ls, p))


def test_empty_word_is_identity():
    assert evaluate(Word((), 3)) == IntegerMatrix.identity(3)


def test_rank2_relator_evaluates_to_identity():
    w = Word([E(1, 2), E(2, 1, -1), E(1, 2)] * 4, 2)
    assert evaluate(w).is_identity()


def test_commutator_gives_elementary():
    w = commutator(Word([E(1, 2)], 3), Word([E(2, 3)], 3))
    assert evaluate(w) == IntegerMatrix.elementary(3, 1, 3, 1)


def test_elementary_row_convention():
    # right multiplication by e_ij(x) adds x times column i to column j
    g = IntegerMatrix([[1, 2], [3, 7]])
    assert (g @ IntegerMatrix.elementary(2, 1, 2, 5)).tolist() == [[1, 7], [3, 22]]


def test_norms():
    assert norm2(IntegerMatrix.identity(3)) == pytest.approx(math.sqrt(3))
    assert norm_inf(IntegerMatrix.elementary(3, 1, 3, 7)) == 7


def test_minimal_parabolic_example():
    g = IntegerMatrix.elementary(4, 2, 1, 5)
    assert minimal_parabolic(g) == BlockPartition([[1, 2], [3], [4]])


def test_block_group_membership():
    part = BlockPartition([[1], [2, 3]])
    assert in_block_group(IntegerMatrix.elementary(3, 1, 3, 9), part)
    assert not in_block_group(IntegerMatrix.elementary(3, 3, 1, 1), part)


def test_partition_cuts_round_trip():
    part = BlockPartition.from_sizes([2, 2, 1])
    assert part.cuts == (2, 4)
    assert BlockPartition.from_cuts(5, part.cuts) == part


def test_bad_letters_rejected():
    with pytest.raises(ValueError):
        E(1, 1)
    with pytest.raises(ValueError):
        S(1, 2, 0)
    with pytest.raises(ValueError):
        D((1, -1, 1))


def test_determinant_checked():
    with pytest.raises(ValueError):
        IntegerMatrix([[2, 0], [0, 1]])


def test_parse_errors():
    with pytest.raises(WordFormatError):
        parse_word("E 1", 3)
    with pytest.raises(WordFormatError):
        parse_word("Q 1 2", 3)


def test_text_round_trip_with_diagonal():
    w = Word([E(1, 2), S(2, 3, -17), D((1, -1, -1)), E(3, 1, -1)], 3)
    assert parse_word(format_word(w), 3) == w


@given(words(4))
def test_word_times_inverse_is_identity(w):
    assert evaluate(w + w.inverse()).is_identity()


@given(words(3), words(3))
def test_evaluation_is_multiplicative(u, v):
    assert evaluate(u + v) == evaluate(u) @ evaluate(v)


@given(words(3))
def test_free_reduction_preserves_value(w):
    r = w.free_reduce()
    assert evaluate(r) == evaluate(w)
    assert len(r) <= len(w)


@given(words(4))
def test_format_parse_round_trip(w):
    assert parse_word(format_word(w), 4) == w


@given(words(4, 6))
def test_minimal_parabolic_contains_value(w):
    g = evaluate(w)
    part = minimal_parabolic(g)
    assert in_block_group(g, part)
    for k in part.cuts:
        assert in_parabolic(g, k)
