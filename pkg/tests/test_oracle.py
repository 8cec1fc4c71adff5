import pytest

from dehnlab.core import E, Word, commutator
from dehnlab.moves import verify_certificate
from dehnlab.oracle import DepthExceeded, oracle_certificate, steinberg_oracle_fill


def test_empty_word():
    assert steinberg_oracle_fill(Word((), 3)) == (0, [])


def test_free_cancellation_needs_no_relator():
    count, _ = steinberg_oracle_fill(Word([E(1, 2), E(2, 3), E(2, 3, -1), E(1, 2, -1)], 3))
    assert count == 0


def test_commutator_relator():
    w = commutator(Word([E(1, 2)], 3), Word([E(2, 3)], 3)) + Word([E(1, 3, -1)], 3)
    count, _ = steinberg_oracle_fill(w)
    assert count == 1


def test_commuting_pair():
    w = commutator(Word([E(1, 3)], 3), Word([E(1, 2)], 3))
    cert = oracle_certificate(w)
    assert cert.breakdown["relators"] <= 2
    assert len(cert.final) == 0
    assert verify_certificate(cert)


def test_rejects_nonidentity():
    with pytest.raises(ValueError):
        steinberg_oracle_fill(Word([E(1, 2)], 3))


def test_budget_exhaustion_is_reported():
    c = commutator(Word([E(1, 2)], 3), Word([E(2, 3)], 3))
    w = c + c + Word([E(1, 3, -1)] * 2, 3)
    with pytest.raises(DepthExceeded):
        steinberg_oracle_fill(w, max_depth=1, node_budget=50)
