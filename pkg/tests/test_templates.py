import random

import pytest

from dehnlab.core import E, IntegerMatrix, Word, commutator, evaluate, in_parabolic
from dehnlab.experiments import cusp_loop_word, null_homotopic_word
from dehnlab.moves import verify_certificate
from dehnlab.symspace import dist_E, point_of
from dehnlab.templates import (ConeFilling, ClassificationFailed, build_template, c_sigma,
                               dyadic_template, face_word, fill_template, fill_word)


def prefixes(w):
    out = [IntegerMatrix.identity(w.p)]
    for l in w.letters:
        out.append(out[-1] @ l.matrix(w.p))
    return out


def parabolic_cut(cls):
    return int(cls[len("Parabolic("):-1]) if cls.startswith("Parabolic") else None


def test_dyadic_bigon():
    tpl = dyadic_template(Word([E(1, 2), E(1, 2, -1)], 3))
    assert tpl.stats["triangles"] == 0 and tpl.stats["bigons"] == 1


def test_dyadic_four_letters():
    w = commutator(Word([E(1, 2)], 4), Word([E(3, 4)], 4))
    tpl = dyadic_template(w)
    assert tpl.stats["triangles"] == 2 and tpl.stats["bigons"] == 1


def test_dyadic_pads_to_power_of_two():
    w = commutator(Word([E(1, 2)], 4), Word([E(3, 4)], 4)) + Word([E(2, 1), E(2, 1, -1)], 4)
    assert len(w) == 6
    tpl = dyadic_template(w)
    assert tpl.t == 8
    assert tpl.stats["triangles"] == 6 and tpl.stats["bigons"] == 1


def test_dyadic_faces_close():
    w = null_homotopic_word(random.Random(5), 3, 30)
    tpl = dyadic_template(w)
    for f in tpl.faces:
        assert evaluate(Word(face_word(tpl, f), 3)).is_identity()


def test_cone_boundary_conditions():
    w = commutator(Word([E(1, 2)], 3), Word([E(2, 3)], 3)) + Word([E(1, 3, -1)], 3)
    cone = ConeFilling(prefixes(w), len(w))
    apex = point_of(IntegerMatrix.identity(3))
    for x in range(len(w) + 1):
        assert dist_E(cone(x, len(w)), apex) == pytest.approx(0, abs=1e-9)
        assert dist_E(cone(x, 0), point_of(prefixes(w)[x])) == pytest.approx(0, abs=1e-9)


def test_cone_speed_bound():
    w = null_homotopic_word(random.Random(2), 3, 24)
    t = len(w)
    cone = ConeFilling(prefixes(w), t)
    rng = random.Random(0)
    pairs = []
    for _ in range(300):
        x, y = rng.uniform(0, t), rng.uniform(0, t)
        pairs.append(((x, y), (min(t, x + rng.uniform(0, 1)), min(t, y + rng.uniform(0, 1)))))
    assert cone.lipschitz_ratio(pairs) <= 2 * c_sigma(3) + 1e-6


def test_empty_word_gives_empty_template():
    tpl = build_template(Word((), 3))
    assert tpl.faces == []
    assert fill_template(tpl).total_cost == 0


def test_shortcut_letters_rejected():
    from dehnlab.core import S
    with pytest.raises(ValueError):
        build_template(Word([S(1, 2, 4), S(1, 2, -4)], 3))


def test_thick_commutator_is_all_small():
    w = commutator(Word([E(1, 2)], 5), Word([E(3, 4)], 5))
    tpl = build_template(w)
    assert set(tpl.classes) == {"Small"}
    c = fill_template(tpl)
    assert len(c.final) == 0 and verify_certificate(c)
    memo_max = max(cst for cst in c.costs)
    assert c.total_cost <= len(tpl.faces) * memo_max


def test_template_soundness():
    w = null_homotopic_word(random.Random(11), 3, 60)
    tpl = build_template(w)
    assert tpl.boundary_word() == w
    for f in tpl.faces:
        assert evaluate(Word(face_word(tpl, f), 3)).is_identity()


def test_cusp_loop_has_exact_parabolic_faces():
    tpl = build_template(cusp_loop_word(16, 5))
    para = [(f, parabolic_cut(c)) for f, c in zip(tpl.faces, tpl.classes) if c.startswith("Parabolic")]
    assert para
    for f, j in para:
        for a in f:
            for b in f:
                assert in_parabolic(tpl.labels[a].inverse() @ tpl.labels[b], j)
    c = fill_template(tpl)
    assert len(c.final) == 0 and verify_certificate(c)


@pytest.mark.parametrize("seed", range(4))
def test_fill_word_end_to_end(seed):
    w = null_homotopic_word(random.Random(seed), 5, 80)
    try:
        c = fill_word(w)
    except ClassificationFailed as exc:
        pytest.fail(f"classification failed: {exc}")
    assert len(c.final) == 0
    assert verify_certificate(c)
