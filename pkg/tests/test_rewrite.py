import random

import pytest
from hypothesis import given, strategies as st

from dehnlab.core import D, E, S, BlockPartition, Word, evaluate
from dehnlab.experiments import triangular_word
from dehnlab.moves import verify_certificate
from dehnlab.rewrite import (BlockTooLarge, BlocksNotDisjoint, NotIdentity, NotRank2, NotTriangular,
                             commute_disjoint, fill_rank2, fill_triangular, parabolic_split,
                             triangular_bound)
from dehnlab.shortcuts import shortcut_length

FIVE = BlockPartition([[1, 2], [3, 4], [5]])


def test_triangular_empty():
    c = fill_triangular(Word((), 3))
    assert c.moves == [] and c.total_cost == 0


def test_triangular_inverse_pair():
    c = fill_triangular(Word([S(1, 2, 7), S(1, 2, -7)], 3))
    assert [m.kind for m in c.moves].count("Add") == 1
    assert len(c.final) == 0 and verify_certificate(c)


def test_triangular_commutator_word():
    w = Word([S(1, 2, 2), S(2, 3, 3), S(1, 2, -2), S(2, 3, -3), S(1, 3, -6)], 3)
    c = fill_triangular(w)
    assert len(c.final) == 0 and verify_certificate(c)


def test_triangular_rejects_lower_letters():
    with pytest.raises(NotTriangular):
        fill_triangular(Word([E(2, 1), E(2, 1, -1)], 3))


def test_triangular_rejects_nonidentity():
    with pytest.raises(NotIdentity):
        fill_triangular(Word([S(1, 2, 3)], 3))


@given(st.integers(0, 10 ** 9), st.sampled_from([3, 4, 5]), st.integers(2, 12), st.integers(1, 24))
def test_triangular_fill_within_bound(seed, p, n, h):
    w = triangular_word(random.Random(seed), p, n, h)
    c = fill_triangular(w)
    assert len(c.final) == 0
    assert verify_certificate(c)
    assert c.total_cost <= triangular_bound(w)


def test_split_inside_one_block():
    w = Word([S(1, 2, 4), S(2, 1, 3), S(2, 1, -3), S(1, 2, -4)], 5)
    proj, c = parabolic_split(w, FIVE)
    assert proj[0] == w
    assert len(proj[1]) == 0 and len(proj[2]) == 0
    assert verify_certificate(c)


def test_split_routes_letters_by_block():
    w = Word([S(1, 2, 2), S(3, 4, 3), S(1, 2, -2), S(3, 4, -3)], 5)
    proj, c = parabolic_split(w, FIVE)
    assert proj[0] == Word([S(1, 2, 2), S(1, 2, -2)], 5)
    assert proj[1] == Word([S(3, 4, 3), S(3, 4, -3)], 5)
    assert len(proj[2]) == 0
    assert c.breakdown["residual"] == ""
    assert verify_certificate(c)


def test_split_cross_letter_leaves_no_residual():
    w = Word([S(1, 3, 9), S(2, 3, 9), S(1, 2, 1), S(2, 3, -9), S(1, 2, -1)], 5)
    assert evaluate(w).is_identity()
    proj, c = parabolic_split(w, FIVE)
    assert c.breakdown["residual"] == ""
    assert all(evaluate(q).is_identity() for q in proj)
    assert verify_certificate(c)


def test_split_rejects_oversized_block():
    with pytest.raises(BlockTooLarge):
        parabolic_split(Word((), 4), BlockPartition([[1, 2, 3], [4]]))


def test_commute_empty_side_costs_nothing():
    c = commute_disjoint(Word((), 5), Word([S(3, 4, 5)], 5))
    assert c.total_cost == 0 and len(c.final) == 0


def test_commute_single_letters():
    c = commute_disjoint(Word([E(1, 2)], 5), Word([E(3, 4)], 5))
    assert [m.kind for m in c.moves].count("Commute") == 1
    assert len(c.final) == 0 and verify_certificate(c)


def test_commute_large_coefficients():
    a, b = Word([S(1, 2, 2 ** 10)], 5), Word([S(3, 4, 2 ** 10)], 5)
    c = commute_disjoint(a, b)
    lhat = shortcut_length(a + b + a.inverse() + b.inverse())
    assert verify_certificate(c)
    assert c.total_cost <= c.model.C_Com * lhat ** 2


def test_commute_rejects_overlap():
    with pytest.raises(BlocksNotDisjoint):
        commute_disjoint(Word([E(1, 2)], 5), Word([E(2, 3)], 5))


def test_rank2_inverse_pair():
    c = fill_rank2(Word([S(1, 2, 5), S(1, 2, -5)], 2))
    assert [m.kind for m in c.moves].count("Add") == 1
    assert len(c.final) == 0


def test_rank2_presentation_relator():
    c = fill_rank2(Word([E(1, 2), E(2, 1, -1), E(1, 2)] * 4, 2))
    assert len(c.final) == 0 and verify_certificate(c)


def test_rank2_rejects_three_indices():
    with pytest.raises(NotRank2):
        fill_rank2(Word([E(1, 2), E(2, 3), E(2, 3, -1), E(1, 2, -1)], 3))


def rank2_letters():
    return st.one_of(
        st.builds(lambda i, j, x: S(i, j, x), st.just(1), st.just(2), st.integers(-2 ** 12, 2 ** 12).filter(bool)),
        st.builds(lambda i, j, x: S(i, j, x), st.just(2), st.just(1), st.integers(-2 ** 12, 2 ** 12).filter(bool)),
        st.sampled_from([E(1, 2), E(2, 1), E(1, 2, -1), E(2, 1, -1), D((-1, -1, 1))]))


@given(st.lists(rank2_letters(), min_size=1, max_size=3))
def test_rank2_fills_any_short_identity_word(half):
    # u u^-1 with letters shuffled into a cyclic rotation stays an identity word
    u = Word(half, 3)
    w = u + u.inverse()
    rot = Word(w.letters[1:] + w.letters[:1], 3)
    for word in (w, rot):
        c = fill_rank2(word)
        assert len(c.final) == 0
        assert verify_certificate(c)
