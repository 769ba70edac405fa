import math

import numpy as np
import pytest

from catkit.billiards import (BilliardTable, CornerWidthEstimate, CrossCheckError, HardBallSystem, WedgeError,
                              collision_bound, compare_ball_events, corner_width_compact, corner_width_sampled,
                              hard_ball_to_billiard, notch_shots, random_ball_table, random_hard_balls, random_shot,
                              reverse, simulate, simulate_hard_balls, simulate_hard_balls_direct, unfolding_count,
                              wedge_reflection_count, wedge_table)
from catkit.bodies import Ball, HalfSpace


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def test_single_wall():
    table = BilliardTable((HalfSpace([0.0, 1.0], 0.0),))
    tr = simulate(table, [0.0, 1.0], unit([1, -1]))
    assert tr.count == 1 and tr.termination == "escape"
    assert np.allclose(tr.events[0].point, [1.0, 0.0])
    assert np.allclose(tr.events[0].direction, unit([1, 1]))
    assert simulate(table, [0.0, 1.0], unit([1, 1])).count == 0


def test_start_inside_wall():
    with pytest.raises(ValueError):
        simulate(BilliardTable((Ball([0, 0], 1),)), [0.2, 0.0], [1.0, 0.0])


def test_direction_must_be_unit():
    with pytest.raises(ValueError):
        simulate(BilliardTable((Ball([0, 0], 1),)), [3.0, 0.0], [2.0, 0.0])


def test_right_wedge_corner_shot():
    c, u, b = wedge_reflection_count(math.pi / 2, [1.0, 1.0], unit([-1.0, -0.8]))
    assert c == u == b == 2


def test_wedge_parallel_ray():
    # parallel to the lower wall, heading into the upper one
    c, u, b = wedge_reflection_count(math.pi / 2, [1.0, 0.5], [-1.0, 0.0])
    assert c == u == 1
    # the outgoing ray of the second bounce runs parallel to the upper face
    c, u, b = wedge_reflection_count(math.pi / 3, [0.5, 0.2], [-1.0, 0.0])
    assert c == u == 2


def test_wedge_start_outside():
    with pytest.raises(WedgeError):
        wedge_reflection_count(math.pi / 2, [1.0, -1.0], [0.0, 1.0])


@pytest.mark.parametrize("alpha", [math.pi / 2, math.pi / 3, math.pi / 5, 1.0])
def test_wedge_counts_match_unfolding(alpha):
    rng = np.random.default_rng(12)
    for _ in range(300):
        th, r, phi = rng.uniform(0, alpha), rng.uniform(0.1, 2), rng.uniform(0, 2 * math.pi)
        c, u, b = wedge_reflection_count(alpha, [r * math.cos(th), r * math.sin(th)], [math.cos(phi), math.sin(phi)])
        assert c == u <= b


def test_unfolding_no_hit():
    assert unfolding_count(math.pi / 2, [1.0, 1.0], unit([1.0, 1.0])) == 0


def test_degenerate_corner_hit():
    tr = simulate(wedge_table(math.pi / 2), [1.0, 1.0], unit([-1.0, -1.0]))
    assert tr.termination == "degenerate hit"


def test_speed_and_reflection_law():
    rng = np.random.default_rng(3)
    table = random_ball_table(rng, 3, 2)
    for s, d in notch_shots(rng, table, 10) + [random_shot(rng, 2) for _ in range(50)]:
        tr = simulate(table, s, d)
        incoming = np.asarray(tr.direction)
        for e in tr.events:
            out = np.asarray(e.direction)
            n = table.walls[e.wall].normal(np.asarray(e.point))
            assert abs(np.linalg.norm(out) - 1.0) <= 1e-12
            assert float(out @ n) == pytest.approx(-float(incoming @ n), abs=1e-12)
            assert np.allclose(out - (out @ n) * n, incoming - (incoming @ n) * n, atol=1e-12)
            incoming = out


def test_segments_stay_outside_walls():
    rng = np.random.default_rng(4)
    table = random_ball_table(rng, 3, 2)
    for s, d in notch_shots(rng, table, 5):
        tr = simulate(table, s, d)
        pts = [np.asarray(tr.start)] + [np.asarray(e.point) for e in tr.events]
        for a, b in zip(pts, pts[1:]):
            for t in np.linspace(0.05, 0.95, 10):
                assert table.wall_containing(a + t * (b - a), 1e-9) is None


def test_time_reversal():
    rng = np.random.default_rng(5)
    table = random_ball_table(rng, 3, 2)
    for s, d in notch_shots(rng, table, 5):
        tr = simulate(table, s, d, horizon=8.0)
        assert tr.termination in ("horizon", "escape") and tr.end_time == 8.0
        back = reverse(table, tr)
        assert back.count == tr.count
        for e, f in zip(tr.events, reversed(back.events)):
            assert np.allclose(e.point, f.point, atol=1e-8)
        assert np.allclose(back.end_point, s, atol=1e-8)


def test_table_round_trip():
    t = wedge_table(1.0)
    assert BilliardTable.from_dict(t.to_dict()).to_dict() == t.to_dict()


def test_collision_bound_examples():
    assert collision_bound(1, math.pi / 2) == 3
    assert collision_bound(2, math.pi / 2) == 81
    assert collision_bound(2, math.pi) == 16
    assert collision_bound(3, math.pi / 3) == 4 ** 9
    assert collision_bound(5, 0.01) == 316 ** 25
    with pytest.raises(ValueError):
        collision_bound(2, 0.0)


def test_compact_corner_widths():
    assert corner_width_compact(0.5, 1.0).eps == pytest.approx(math.pi / 3, abs=1e-15)
    assert corner_width_compact(1 / math.sqrt(2), 1.0).eps == pytest.approx(math.pi / 2, abs=1e-15)
    assert corner_width_compact(1 - 1e-12, 1.0).eps == pytest.approx(math.pi, abs=1e-5)
    with pytest.raises(ValueError):
        corner_width_compact(1.0, 1.0)
    with pytest.raises(ValueError):
        CornerWidthEstimate(0.0, "sampled")


def test_ball_tables_respect_bound():
    rng = np.random.default_rng(6)
    eps = corner_width_compact(0.5, 1.0).eps
    for walls in (2, 3):
        bound = collision_bound(walls, eps)
        for _ in range(20):
            table = random_ball_table(rng, walls, 2)
            for s, d in [random_shot(rng, 2) for _ in range(10)] + notch_shots(rng, table, 3):
                assert simulate(table, s, d).count <= bound


def test_sampled_width_of_a_right_corner():
    est = corner_width_sampled([HalfSpace([1, 0], 0), HalfSpace([0, 1], 0)], np.random.default_rng(1), samples=20)
    assert est.method == "sampled"
    assert est.eps == pytest.approx(math.pi / 2, abs=1e-6)


def test_sampled_width_of_cylinders_is_positive():
    sys = random_hard_balls(np.random.default_rng(2), 3)
    cb = hard_ball_to_billiard(sys)
    est = corner_width_sampled(cb.table.walls, np.random.default_rng(3), samples=10)
    assert 0 < est.eps <= math.pi


def head_on(m1=1.0, m2=1.0):
    return HardBallSystem([0.5, 0.5], [m1, m2], [[-2, 0, 0], [2, 0, 0]], [[1, 0, 0], [-1, 0, 0]])


def test_reduction_shapes():
    one = HardBallSystem([1.0], [1.0], [[0, 0, 0]], [[1, 0, 0]])
    assert hard_ball_to_billiard(one).table.walls == ()
    assert simulate_hard_balls(one).events == []
    three = hard_ball_to_billiard(random_hard_balls(np.random.default_rng(0), 3))
    assert len(three.table.walls) == 3 and three.table.dim == 9


def test_head_on_exchange():
    run = simulate_hard_balls(head_on())
    assert len(run.events) == 1
    e = run.events[0]
    assert e.time == pytest.approx(1.5)
    assert np.allclose(e.velocities, [[-1, 0, 0], [1, 0, 0]])


def test_unequal_masses():
    run = simulate_hard_balls(head_on(1.0, 3.0))
    v1, v2 = map(np.asarray, run.events[0].velocities)
    # textbook 1-D elastic formulas
    assert v1[0] == pytest.approx((1 - 3) / 4 * 1 + 2 * 3 / 4 * -1)
    assert v2[0] == pytest.approx(2 * 1 / 4 * 1 + (3 - 1) / 4 * -1)


def test_overlap_rejected():
    with pytest.raises(ValueError):
        HardBallSystem([1, 1], [1, 1], [[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [0, 0, 0]])


def test_conservation_and_cross_check():
    rng = np.random.default_rng(7)
    for k in (2, 3, 4):
        for _ in range(40):
            sys = random_hard_balls(rng, k)
            run = simulate_hard_balls(sys)
            assert run.final.energy() == pytest.approx(sys.energy(), rel=1e-12 * max(1, len(run.events)))
            assert np.allclose(run.final.momentum(), sys.momentum(), rtol=0, atol=1e-12 * max(1.0, np.abs(sys.momentum()).max()) * max(1, len(run.events)))


def test_identical_pair_collides_at_most_once():
    rng = np.random.default_rng(8)
    for _ in range(200):
        assert len(simulate_hard_balls(random_hard_balls(rng, 2, identical=True)).events) <= 1


def test_compare_detects_mismatch():
    run = simulate_hard_balls_direct(head_on())
    with pytest.raises(CrossCheckError):
        compare_ball_events(run.events, [])


def test_triple_collision_is_degenerate():
    sys = HardBallSystem([0.5] * 3, [1.0] * 3, [[-2, 0, 0], [0, 0, 0], [2, 0, 0]],
                         [[1, 0, 0], [0, 0, 0], [-1, 0, 0]])
    run = simulate_hard_balls(sys)
    assert run.termination == "degenerate hit" and run.events == []
