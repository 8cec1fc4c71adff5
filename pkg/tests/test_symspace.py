import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dehnlab.core import IntegerMatrix, in_parabolic
from dehnlab.experiments import cusp_point, gauss_reduce, random_gamma, random_phi, _random_n
from dehnlab.symspace import (C_PHI, NotPositiveDefinite, Singular, c_v, dist_E, flag_subspace,
                              flag_window, geodesic, in_siegel, iwasawa, parabolic_witness, phi,
                              point_of, point_of_gram, rho, short_vector_space, siegel_point,
                              siegel_reduce)

seeds = st.integers(0, 10 ** 9)


def random_point(rng, p, radius=8.0):
    ph = random_phi(rng, p, rng.uniform(0, radius))
    return siegel_point(random_gamma(rng, p, rng.randint(0, 12)), _random_n(rng, p), np.exp(ph))


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return [[c, -s], [s, c]]


def test_point_of_identity():
    x = point_of(IntegerMatrix.identity(3))
    assert np.allclose(x.gram, np.eye(3))


def test_rotation_invariance():
    assert dist_E(point_of(rotation(0.7)), point_of(np.eye(2))) == pytest.approx(0, abs=1e-12)


def test_point_of_elementary_gram():
    x = point_of(IntegerMatrix.elementary(2, 1, 2, 3))
    assert np.allclose(x.gram, [[10, 3], [3, 1]])


def test_point_of_errors():
    with pytest.raises(Singular):
        point_of([[2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(NotPositiveDefinite):
        point_of_gram([[1.0, 2.0], [2.0, 1.0]])


def test_distance_examples():
    x = point_of(np.eye(2))
    assert dist_E(x, x) == 0
    assert dist_E(x, point_of(np.diag([math.e, 1 / math.e]))) == pytest.approx(math.sqrt(2))


def test_geodesic_examples():
    x, y = point_of(np.eye(2)), point_of(np.diag([math.e ** 2, math.e ** -2]))
    assert dist_E(geodesic(x, y, 0.0), x) == pytest.approx(0, abs=1e-12)
    assert dist_E(geodesic(x, y, 1.0), y) == pytest.approx(0, abs=1e-9)
    mid = point_of(np.diag([math.e, 1 / math.e]))
    assert dist_E(geodesic(x, y, 0.5), mid) == pytest.approx(0, abs=1e-9)


def test_iwasawa_examples():
    t = iwasawa(np.eye(3))
    assert np.allclose(t.n, np.eye(3)) and np.allclose(t.a, 1)
    t = iwasawa(np.diag([2.0, 0.5]))
    assert np.allclose(t.n, np.eye(2)) and np.allclose(t.a, [2, 0.5])


def test_reduction_of_base_point():
    assert rho(point_of(IntegerMatrix.identity(4))) == IntegerMatrix.identity(4)
    assert np.allclose(phi(point_of(IntegerMatrix.identity(3))), 0)


def test_phi_of_diagonal_point():
    x = point_of(np.diag([math.e ** 3, math.e ** -1, math.e ** -1, math.e ** -1]))
    assert np.allclose(phi(x), [3, -1, -1, -1])


def test_short_vector_space_at_base_point():
    x = point_of(IntegerMatrix.identity(3))
    assert short_vector_space(x, 0.5) == []
    assert len(short_vector_space(x, 1.0)) == 3


@given(seeds, st.sampled_from([2, 3, 4]))
def test_triangle_inequality(seed, p):
    rng = random.Random(seed)
    x, y, z = (random_point(rng, p) for _ in range(3))
    assert dist_E(x, z) <= dist_E(x, y) + dist_E(y, z) + 1e-9


@given(seeds, st.sampled_from([2, 3, 4]), st.floats(0, 1))
def test_geodesic_constant_speed(seed, p, t):
    rng = random.Random(seed)
    x, y = random_point(rng, p, 4), random_point(rng, p, 4)
    d = dist_E(x, y)
    g = geodesic(x, y, t)
    assert dist_E(x, g) == pytest.approx(t * d, abs=1e-6 * (1 + d))
    assert dist_E(g, y) == pytest.approx((1 - t) * d, abs=1e-6 * (1 + d))


@given(seeds, st.sampled_from([2, 3, 4, 5]))
def test_iwasawa_reconstruction(seed, p):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(p, p))
    t = iwasawa(g)
    # g = n a k with k orthogonal: compare the Gram matrices
    na = t.n @ np.diag(t.a)
    assert np.allclose(na @ na.T, g @ g.T, atol=1e-9 * np.abs(g @ g.T).max())


@given(seeds, st.sampled_from([3, 4, 5]))
def test_reduction_round_trip(seed, p):
    rng = random.Random(seed)
    ph = random_phi(rng, p, rng.uniform(0, 30))
    x = siegel_point(random_gamma(rng, p, rng.randint(0, 20)), _random_n(rng, p), np.exp(ph))
    red = siegel_reduce(x)
    assert in_siegel(iwasawa(x.translate(red.gamma.inverse())), red.eps_s, 1e-6)
    assert np.max(np.abs(red.phi - ph)) <= C_PHI


@given(seeds)
def test_rank2_reduction_matches_gauss(seed):
    rng = random.Random(seed)
    ph = random_phi(rng, 2, rng.uniform(0, 30))
    x = siegel_point(random_gamma(rng, 2, rng.randint(0, 30)), _random_n(rng, 2), np.exp(ph))
    g, _ = gauss_reduce(x)
    got = siegel_reduce(x).gamma
    assert got == g or got == g @ IntegerMatrix.diagonal([-1, -1])


def test_gauss_example_basis():
    base = siegel_point(IntegerMatrix.identity(2), [[1, 0.7], [0, 1]], [4.0, 0.25])
    g, rows = gauss_reduce(base)
    got = siegel_reduce(base).gamma
    assert got == g or got == g @ IntegerMatrix.diagonal([-1, -1])


@given(seeds, st.sampled_from([3, 4]))
def test_phi_is_coarsely_lipschitz(seed, p):
    rng = random.Random(seed)
    x, y = random_point(rng, p, 20), random_point(rng, p, 20)
    d = dist_E(x, y)
    assert np.all(np.abs(phi(x) - phi(y)) <= d + C_PHI)


@given(seeds, st.sampled_from([(3, 1), (3, 2), (4, 2)]))
def test_flag_window_recovers_flag(seed, pk):
    p, k = pk
    rng = random.Random(seed)
    x, *_ = cusp_point(rng, p, k, 2 * c_v(p) + 0.5)
    red = siegel_reduce(x)
    lo, hi = flag_window(red, k)
    assert lo < hi
    r = math.sqrt(lo * hi)
    assert short_vector_space(x, r) == flag_subspace(red.gamma, k)


def test_witness_on_equal_points():
    rng = random.Random(3)
    x, *_ = cusp_point(rng, 4, 2, 30.0)
    j = parabolic_witness(x, x)
    assert j is not None
    g = rho(x)
    assert in_parabolic(g.inverse() @ g, j)


def test_witness_none_in_thick_part():
    x = point_of(IntegerMatrix.identity(3))
    y = point_of(IntegerMatrix.elementary(3, 1, 2, 1))
    assert parabolic_witness(x, y) is None
