import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catkit.metric import (FiniteMetricSpace, ModelConfig, alexandrov_lemma, angle_curvature_gap,
                           gh_distance_bruteforce, model_angle, model_triangle, validate_metric)
from catkit import samples

E, S, H = ModelConfig(0), ModelConfig(1), ModelConfig(-1)


def law_of_cosines(opp, a, b, kappa):
    # independent route: textbook cosine laws
    if kappa == 0:
        return math.acos((a * a + b * b - opp * opp) / (2 * a * b))
    if kappa == 1:
        return math.acos((math.cos(opp) - math.cos(a) * math.cos(b)) / (math.sin(a) * math.sin(b)))
    return math.acos((math.cosh(a) * math.cosh(b) - math.cosh(opp)) / (math.sinh(a) * math.sinh(b)))


def test_validate_ok():
    m = FiniteMetricSpace.from_points([[0, 0], [1, 0], [0, 1]])
    assert validate_metric(m).ok


def test_validate_triangle_violation():
    m = FiniteMetricSpace("abc", [[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    rep = validate_metric(m)
    assert not rep.ok
    assert rep.violations == [("triangle", ("a", "b", "c"), 1.0)]


def test_validate_asymmetric():
    rep = validate_metric(FiniteMetricSpace(None, [[0, 1], [2, 0]]))
    assert [v[0] for v in rep.violations] == ["symmetry"]


@pytest.mark.parametrize("d", [[[0, 1, 2], [1, 0, 1]], [[0, math.nan], [math.nan, 0]]])
def test_bad_matrix(d):
    with pytest.raises(ValueError):
        FiniteMetricSpace(None, d)


def test_json_round_trip():
    m = FiniteMetricSpace.from_points(np.eye(3), labels=["x", "y", "z"])
    back = FiniteMetricSpace.from_json(m.to_json())
    assert back.labels == m.labels
    assert np.array_equal(back.dist, m.dist)


def test_equilateral_angles():
    tri = model_triangle((1, 1, 1), E)
    for a in tri.angles():
        assert a == pytest.approx(math.pi / 3, abs=1e-12)


def test_right_triangle():
    tri = model_triangle((3, 4, 5), E)
    assert tri.angles()[0] == pytest.approx(math.pi / 2, abs=1e-12)


def test_spherical_perimeter_too_big():
    assert model_triangle((math.pi, math.pi / 2, math.pi / 2), S) is None
    assert model_angle(math.pi, math.pi / 2, math.pi / 2, S) is None


def test_octant_triangle():
    h = math.pi / 2
    assert model_angle(h, h, h, S) == pytest.approx(h, abs=1e-12)


def test_zero_side_gives_none():
    assert model_angle(1.0, 0.0, 1.0, E) is None


def test_violating_sides_raise():
    with pytest.raises(ValueError):
        model_angle(3.0, 1.0, 1.0, E)


@pytest.mark.parametrize("kappa", [-1, 0, 1])
@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(0.05, 1.5), st.floats(0.05, 0.95))
def test_matches_cosine_law(kappa, a, b, t):
    opp = abs(a - b) + t * (a + b - abs(a - b))
    got = model_angle(opp, a, b, ModelConfig(kappa))
    assert got == pytest.approx(law_of_cosines(opp, a, b, kappa), abs=1e-7)


@pytest.mark.parametrize("kappa", [-1, 0, 1])
def test_monotone_in_opposite_side(kappa):
    cfg = ModelConfig(kappa)
    opps = np.linspace(0.31, 1.69, 200)
    ang = [model_angle(o, 0.7, 1.0, cfg) for o in opps]
    assert all(b > a for a, b in zip(ang, ang[1:]))


def test_curvature_ordering():
    rng = np.random.default_rng(11)
    for _ in range(100_000):
        px, py, xy = samples.angle_triple(rng, high=math.pi / 2)
        h, e, s = (model_angle(xy, px, py, c) for c in (H, E, S))
        assert h <= e + 1e-12 and e <= s + 1e-12


def test_gap_small_triangle():
    gs, gh, bound = angle_curvature_gap(0.1, 0.1, 0.1)
    assert gs <= 0.01 and gh <= 0.01 and bound == pytest.approx(0.01)


def test_gap_degenerate():
    gs, gh, _ = angle_curvature_gap(0.5, 0.7, 1.2)
    assert gs == pytest.approx(0.0, abs=1e-6) and gh == pytest.approx(0.0, abs=1e-6)


def test_gap_unit_equilateral():
    gs, gh, bound = angle_curvature_gap(1.0, 1.0, 1.0)
    # frozen from the cosine laws
    assert gs == pytest.approx(0.1651982985779883, abs=1e-12)
    assert gh == pytest.approx(0.12839967901857063, abs=1e-12)
    assert max(gs, gh) <= bound


def test_gap_zero_side_raises():
    with pytest.raises(ValueError):
        angle_curvature_gap(0.0, 1.0, 1.0)


def test_spherical_gap_bound_fails_near_pi():
    # a side at p close to pi breaks the spherical half of the bound
    gs, gh, bound = angle_curvature_gap(0.284, 3.121, 2.876)
    assert gs > bound
    assert gh <= bound


def test_spherical_gap_bound_holds_below_threshold():
    rng = np.random.default_rng(5)
    for _ in range(20_000):
        px, py, xy = samples.angle_triple(rng, high=math.pi)
        gs, gh, bound = angle_curvature_gap(px, py, xy)
        assert gh <= bound + 1e-12
        if gs > bound + 1e-12:
            assert max(px, py) > 2.8


def planar_angle(opp, a1, a2):
    # place the vertex at 0, the first neighbour on the x axis
    x = (a1 * a1 + a2 * a2 - opp * opp) / (2 * a1)
    y = math.sqrt(max(a2 * a2 - x * x, 0.0))
    return math.atan2(y, x)


def test_alexandrov_planar_equality():
    p, x, z, y = map(np.array, ([0.0, 1.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]))
    d = lambda u, v: float(np.linalg.norm(u - v))
    rep = alexandrov_lemma(d(p, x), d(p, y), d(p, z), d(x, y), d(x, z), d(z, y), E)
    assert (rep.sign_a, rep.sign_b) == ("zero", "zero")
    assert rep.holds


@pytest.mark.parametrize("factor,sign", [(1.05, "pos"), (0.95, "neg")])
def test_alexandrov_perturbed(factor, sign):
    px, pz, py = 1.0, math.sqrt(2), math.sqrt(5) * factor
    rep = alexandrov_lemma(px, py, pz, 2.0, 1.0, 1.0, E)
    assert (rep.sign_a, rep.sign_b) == (sign, sign)
    assert rep.holds
    # the same values through explicit coordinates
    va = planar_angle(py, px, 2.0) - planar_angle(pz, px, 1.0)
    vb = planar_angle(px, pz, 1.0) + planar_angle(py, pz, 1.0) - math.pi
    assert rep.value_a == pytest.approx(va, abs=1e-12)
    assert rep.value_b == pytest.approx(vb, abs=1e-12)


def test_alexandrov_not_between():
    with pytest.raises(ValueError):
        alexandrov_lemma(1, 1, 1, 2.0, 0.5, 0.5, E)


@pytest.mark.parametrize("kappa", [-1, 0, 1])
def test_alexandrov_random(kappa):
    rng = np.random.default_rng(100 + kappa)
    cfg = ModelConfig(kappa)
    for _ in range(1000):
        assert alexandrov_lemma(*samples.alexandrov_config(rng, kappa), cfg).holds


def gh_naive(X, Y):
    def one(dx, dy):
        best = math.inf
        for f in itertools.product(range(len(dy)), repeat=len(dx)):
            best = min(best, max(0.0, max(dx[i, j] - dy[f[i], f[j]] for i in range(len(dx)) for j in range(len(dx)))))
        return best
    return max(one(X.dist, Y.dist), one(Y.dist, X.dist))


def test_gh_examples():
    pt = FiniteMetricSpace(None, [[0]])
    two = FiniteMetricSpace(None, [[0, 1.5], [1.5, 0]])
    wider = FiniteMetricSpace(None, [[0, 1.7], [1.7, 0]])
    assert gh_distance_bruteforce(two, two) == 0
    assert gh_distance_bruteforce(pt, two) == pytest.approx(1.5)
    assert gh_distance_bruteforce(two, wider) == pytest.approx(0.2)


def test_gh_limit():
    big = FiniteMetricSpace.from_points(np.arange(9.0)[:, None])
    with pytest.raises(ValueError):
        gh_distance_bruteforce(big, big)


def random_space(rng, n):
    return FiniteMetricSpace.from_points(rng.standard_normal((n, 2)))


def test_gh_matches_naive_and_is_a_pseudometric():
    rng = np.random.default_rng(3)
    for _ in range(30):
        A, B, C = (random_space(rng, int(rng.integers(1, 5))) for _ in range(3))
        ab = gh_distance_bruteforce(A, B)
        assert ab == pytest.approx(gh_naive(A, B), abs=1e-12)
        assert ab == pytest.approx(gh_distance_bruteforce(B, A), abs=1e-12)
        assert ab <= gh_distance_bruteforce(A, C) + gh_distance_bruteforce(C, B) + 1e-12


def test_alexandrov_second_order_slack():
    # sign values ~3e-5 give an inequality slack ~2e-10, under the tolerance
    c = (0.6121054985792297, 1.5251778323516025, 0.6519981082564458, 1.4279341116657092,
         0.16831899449287147, 1.2596151171728378)
    rep = alexandrov_lemma(*c, S)
    assert (rep.sign_a, rep.sign_b) == ("pos", "pos")
    assert 0 < rep.angle_inequality_slack < 1e-9
    assert rep.holds
