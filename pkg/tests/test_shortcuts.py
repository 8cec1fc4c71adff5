from hypothesis import given, strategies as st

from dehnlab.core import E, S, IntegerMatrix, Word, evaluate
from dehnlab.shortcuts import (C_SC, build_shortcut, lambda_expand, length_bound,
                               shortcut_length)

# largest observed increase of ℓ̂(ŝ13(2^k)) per extra bit, k <= 40, with headroom
C_STEP = 2 * C_SC


def test_unit_coefficient_is_the_generator():
    assert build_shortcut(1, 2, 1, 3) == Word([E(1, 2)], 3)


def test_large_coefficient_exact():
    w = build_shortcut(1, 3, 1024, 3)
    assert evaluate(w) == IntegerMatrix.elementary(3, 1, 3, 1024)


def test_negative_coefficient_length():
    w = build_shortcut(2, 1, -6, 4)
    assert evaluate(w) == IntegerMatrix.elementary(4, 2, 1, -6)
    assert len(w) <= C_SC * 3


def test_lambda_basics():
    assert lambda_expand(Word((), 3)) == Word((), 3)
    assert lambda_expand(Word([S(1, 2, 1)], 3)) == Word([E(1, 2)], 3)
    assert evaluate(lambda_expand(Word([S(1, 3, 20), S(1, 3, -20)], 3))).is_identity()


def test_lhat_basics():
    assert shortcut_length(Word((), 3)) == 0
    assert shortcut_length(Word([E(1, 2)], 3)) == 1


def test_lhat_grows_affinely_in_bits():
    lengths = [shortcut_length(Word([S(1, 3, 2 ** k)], 3)) for k in range(41)]
    steps = [b - a for a, b in zip(lengths, lengths[1:])]
    assert max(steps) <= C_STEP


@given(st.integers(1, 5), st.integers(1, 5), st.integers(-2 ** 80, 2 ** 80).filter(bool))
def test_shortcut_exact_and_short(a, b, x):
    if a == b:
        return
    w = build_shortcut(a, b, x, 5)
    assert evaluate(w) == IntegerMatrix.elementary(5, a, b, x)
    assert len(w) <= length_bound(x)
    assert all(l.kind == "E" for l in w)


@given(st.lists(st.tuples(st.sampled_from([(1, 2), (2, 3), (3, 1), (1, 3)]),
                          st.integers(-10 ** 9, 10 ** 9).filter(bool)), max_size=5))
def test_lambda_preserves_value(items):
    w = Word([S(i, j, x) for (i, j), x in items], 3)
    lw = lambda_expand(w)
    assert evaluate(lw) == evaluate(w)
    assert len(lw) == shortcut_length(w)
