import random

from hypothesis import given, strategies as st

from dehnlab.core import S, IntegerMatrix, Word, evaluate, minimal_parabolic
from dehnlab.experiments import _random_block, random_u23
from dehnlab.normal import normal_form, normal_form_bound_ratio, omega, omega_constant, omega_triangle


def test_identity_has_empty_normal_form():
    dec, w = normal_form(IntegerMatrix.identity(3))
    assert len(w) == 0
    assert dec.diagonal == (1, 1, 1)


def test_single_elementary():
    for p in (3, 4, 5):
        dec, w = normal_form(IntegerMatrix.elementary(p, 1, 3, 5))
        assert w == Word([S(1, 3, 5)], p)
        assert dec.reassemble() == IntegerMatrix.elementary(p, 1, 3, 5)


def test_deterministic():
    g = _random_block(random.Random(7), 4, 12)
    assert omega(g) == omega(g)


@given(st.integers(0, 10 ** 9), st.sampled_from([3, 4, 5]), st.integers(1, 20))
def test_reassembly_and_length(seed, p, bits):
    g = _random_block(random.Random(seed), p, bits)
    dec, w = normal_form(g)
    assert evaluate(w) == g
    assert dec.reassemble() == g
    assert dec.partition == minimal_parabolic(g)
    assert normal_form_bound_ratio(g) <= omega_constant(p)


@given(st.integers(0, 10 ** 9), st.integers(1, 12))
def test_parabolic_input_keeps_its_blocks(seed, bits):
    g = random_u23(random.Random(seed), bits)
    _, w = normal_form(g)
    assert evaluate(w) == g
    assert all(l.kind == "D" or not (l.i > 2 and l.j <= 2) for l in w)


@given(st.integers(0, 10 ** 9))
def test_omega_triangle_is_identity_word(seed):
    rng = random.Random(seed)
    a, b = random_u23(rng, 8), random_u23(rng, 8)
    assert evaluate(omega_triangle(a, b)).is_identity()
