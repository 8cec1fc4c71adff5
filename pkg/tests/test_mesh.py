import math
import random

import pytest
from hypothesis import given, strategies as st

from dehnlab.mesh import (FieldViolation, SizingField, adaptive_mesh, audit_mesh, cone_field,
                          constant_field, random_field, triangulate_cover, whitney_cover)


def lattice_min(h, S):
    """Minimum of h over the lattice points of S; exact for the cone field."""
    x0, y0 = S.origin
    return min(h(x, y) for x in range(x0, x0 + S.side + 1) for y in range(y0, y0 + S.side + 1))


def test_unit_field_gives_unit_squares():
    cover = whitney_cover(8, constant_field(1))
    assert len(cover) == 64 and all(S.side == 1 for S in cover)


def test_constant_t_gives_one_square():
    cover = whitney_cover(16, constant_field(16))
    assert len(cover) == 1 and cover[0].side == 16


def test_cone_field_cover_is_maximal():
    t = 32
    h = cone_field(t)
    cover = whitney_cover(t, h)
    assert sum(S.side ** 2 for S in cover) == t * t
    for S in cover:
        assert S.side == 1 or lattice_min(h, S) >= S.side
        P = S.parent()
        if P.side <= t:
            assert lattice_min(h, P) < P.side


def test_unit_mesh_triangle_count_and_perimeter():
    t = 8
    mesh = adaptive_mesh(t, constant_field(1))
    assert len(mesh.triangles) == 2 * t * t
    rep = audit_mesh(mesh, constant_field(1))
    assert rep.ok
    assert rep.perimeter_sum == pytest.approx(2 * t * t * (2 + math.sqrt(2)) ** 2)


def test_single_square_mesh():
    mesh = adaptive_mesh(4, constant_field(4))
    assert len(mesh.triangles) == 2
    assert audit_mesh(mesh, constant_field(4)).triangle_count


def test_graded_polygons_have_few_sides():
    mesh = adaptive_mesh(64, cone_field(64))
    assert max(mesh.polygon_sides) <= 32
    assert audit_mesh(mesh, cone_field(64)).ok


def test_deterministic():
    a = adaptive_mesh(32, cone_field(32))
    b = adaptive_mesh(32, cone_field(32))
    assert a.vertices == b.vertices and a.triangles == b.triangles


def test_triangulate_without_t():
    cover = whitney_cover(8, constant_field(2))
    assert triangulate_cover(cover).t == 8


def test_field_violation_detected():
    h = SizingField(lambda x, y: 1 + 3 * x)
    with pytest.raises(FieldViolation):
        h.check(16)


def test_non_power_of_two_rejected():
    with pytest.raises(ValueError):
        whitney_cover(12, constant_field(1))


@given(st.integers(0, 10 ** 9), st.sampled_from([16, 32, 64]))
def test_random_fields_pass_audit(seed, t):
    h = random_field(t, random.Random(seed))
    h.check(t, samples=200, seed=seed)
    cover = whitney_cover(t, h)
    assert sum(S.side ** 2 for S in cover) == t * t
    mesh = triangulate_cover(cover, t)
    rep = audit_mesh(mesh, h)
    assert rep.ok, rep.witnesses
    assert len(mesh.vertices) - len(mesh.edges()) + len(mesh.triangles) == 1
