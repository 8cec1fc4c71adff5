import random

import pytest
from hypothesis import given, strategies as st

from dehnlab.core import D, E, S, Word, evaluate
from dehnlab.experiments import random_move
from dehnlab.moves import (CostModel, FillingCertificate, IndexClash, MacroMove, PatternMismatch,
                           Session, apply_move, rewrite, verify_certificate)
from dehnlab.rewrite import fill_triangular


def plain_product(letters, p):
    """Independent evaluation: explicit integer matrices multiplied left to right."""
    m = [[int(i == j) for j in range(p)] for i in range(p)]
    for l in letters:
        f = [[int(i == j) for j in range(p)] for i in range(p)]
        if l.kind == "D":
            for i, s in enumerate(l.signs):
                f[i][i] = s
        else:
            f[l.i - 1][l.j - 1] = l.sign * l.x
        m = [[sum(m[i][k] * f[k][j] for k in range(p)) for j in range(p)] for i in range(p)]
    return m


def swap_word(i, j):
    # s_ij = e_ji^-1 e_ij e_ji^-1
    return (E(j, i, -1), E(i, j), E(j, i, -1))


def test_add_merges_coefficients():
    rep, _ = rewrite("Add", "merge", (S(1, 2, 3), S(1, 2, 5)), (), 3)
    assert rep == (S(1, 2, 8),)


def test_multiply_commutator():
    rep, _ = rewrite("Multiply", "commutator", (S(1, 2, 2), S(2, 3, 3), S(1, 2, -2), S(2, 3, -3)), (), 3)
    assert rep == (S(1, 3, 6),)


def test_swap_conjugation():
    site = swap_word(1, 2) + (S(1, 3, 4),) + tuple(l.inverse() for l in reversed(swap_word(1, 2)))
    rep, _ = rewrite("SwapConj", "conj", site, (), 3)
    assert rep == (S(2, 3, -4),)
    assert plain_product(site, 3) == plain_product(rep, 3)


def test_commute_needs_disjoint_indices():
    with pytest.raises(IndexClash):
        rewrite("Commute", "swap", (S(1, 2, 1), S(2, 3, 1)), (), 3)


def test_site_mismatch_rejected():
    with pytest.raises(PatternMismatch):
        rewrite("Add", "merge", (S(1, 2, 3), S(1, 3, 5)), (), 3)


def test_cost_model_rejects_nonpositive():
    with pytest.raises(ValueError):
        CostModel(C_Add=0)


def test_cost_scales_with_model():
    _, c1 = rewrite("Add", "merge", (S(1, 2, 3), S(1, 2, 5)), (), 3)
    _, c2 = rewrite("Add", "merge", (S(1, 2, 3), S(1, 2, 5)), (), 3, CostModel(C_Add=2.0))
    assert c2 == pytest.approx(2 * c1)


def _example_certificate():
    # [ŝ12(2), ŝ23(3)] ŝ13(−6), an identity word of upper triangular letters
    w = Word([S(1, 2, 2), S(2, 3, 3), S(1, 2, -2), S(2, 3, -3), S(1, 3, -6)], 3)
    return fill_triangular(w)


def test_empty_certificate_verifies():
    assert verify_certificate(Session(Word((), 3)).certificate())


def test_filler_certificate_verifies():
    cert = _example_certificate()
    assert len(cert.final) == 0
    assert verify_certificate(cert)


def test_tampered_coefficient_rejected():
    cert = _example_certificate()
    letters = list(cert.initial.letters)
    letters[0] = S(1, 2, 3)
    bad = FillingCertificate(Word(letters, 3), cert.moves, cert.final, cert.costs, cert.model)
    assert not verify_certificate(bad)


def test_tampered_cost_rejected():
    cert = _example_certificate()
    costs = list(cert.costs)
    costs[-1] += 1.0
    bad = FillingCertificate(cert.initial, cert.moves, cert.final, costs, cert.model)
    assert not verify_certificate(bad)


def test_json_round_trip():
    cert = _example_certificate()
    back = FillingCertificate.from_json(cert.to_json())
    assert back.initial == cert.initial and back.final == cert.final
    assert back.moves == cert.moves
    assert back.total_cost == pytest.approx(cert.total_cost)
    assert verify_certificate(back)


def test_fallback_marks_uncertified():
    w = Word([E(1, 2), E(1, 2, -1)], 3)
    s = Session(w)
    s.apply("Fallback", 0, 2, "replace", ("",))
    cert = s.certificate()
    assert verify_certificate(cert)
    assert not cert.certified


def test_spliced_absorb_matches_replay():
    inner = _example_certificate()
    prefix, suffix = (E(1, 2), D((1, -1, -1))), (E(3, 1, -1),)
    outer = Word(prefix + inner.initial.letters + suffix, 3)
    a, b = Session(outer), Session(outer)
    a.absorb(inner, len(prefix), replay=True)
    b.absorb(inner, len(prefix), replay=False)
    assert a.letters == b.letters
    assert a.moves == b.moves and a.costs == b.costs
    assert verify_certificate(b.certificate())


def test_spliced_absorb_checks_site():
    inner = _example_certificate()
    with pytest.raises(PatternMismatch):
        Session(Word([E(1, 2)] * 6, 3)).absorb(inner, 0, replay=False)


@given(st.integers(0, 2 ** 32), st.sampled_from([3, 4, 5]))
def test_random_moves_preserve_value(seed, p):
    rng = random.Random(seed)
    for _ in range(50):
        site, kind, form, params = random_move(rng, p)
        w = Word(tuple(site), p)
        try:
            w2, cost = apply_move(w, MacroMove(kind, 0, len(site), form, tuple(params)))
        except (PatternMismatch, IndexClash):
            continue
        assert plain_product(w2.letters, p) == plain_product(w.letters, p)
        assert cost >= 0
        return
