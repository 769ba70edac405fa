"""Acceptance criteria 1-10, at full sizes and tolerances.

Each test records a one-line summary; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import io
import math
import time

import numpy as np

from catkit import samples
from catkit.billiards import (BilliardTable, collision_bound, corner_width_compact, notch_shots, random_ball_table,
                              random_hard_balls, random_shot, simulate, simulate_hard_balls, wedge_reflection_count)
from catkit.bodies import HalfSpace
from catkit.cat4 import cat_quadruple_all_splittings, classify_four_point
from catkit.cli import run
from catkit.complexes import (barycentric_subdivision, bhv_link_complex, complex_classes, complex_mask,
                              cubical_analog, is_flag, no_triangle_in_all_links)
from catkit.metric import ModelConfig, alexandrov_lemma, angle_curvature_gap
from catkit.pastry import PuffPastry, build_bfk_array, end_to_end_convex_check
from oracles import halfplane_pastry_distance

E = ModelConfig(0)


def test_criterion_1_four_point_classes(record_property):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    n = 10_000
    e = [classify_four_point(samples.euclidean_quadruple(rng)).label for _ in range(n)]
    s = [classify_four_point(samples.sphere_quadruple(rng)).label for _ in range(n)]
    h = [classify_four_point(samples.hyperbolic_quadruple(rng)).label for _ in range(n)]
    elapsed = time.perf_counter() - t0
    band = max(x.count("Boundary") for x in (e, s, h)) / n
    record_property("detail", f"E3 E4={e.count('E4')}/{n} sphere N4={s.count('N4')} hyperbolic P4={h.count('P4')} "
                              f"boundary<={band:.2%} {elapsed:.1f}s")
    assert e.count("E4") == n
    assert s.count("N4") == 0 and h.count("P4") == 0
    assert band <= 0.005
    assert elapsed < 10


def test_criterion_2_cat0_quadruples(record_property):
    rng = np.random.default_rng(1002)
    n = 10_000
    tree = samples.random_tree_metric(rng, 20)
    prod = samples.product_metric(samples.random_tree_metric(rng, 20), samples.random_tree_metric(rng, 20))
    worst = {}
    for name, gen in (("E4", lambda: samples.euclidean_quadruple(rng, 4)),
                      ("tree", lambda: samples.sub_quadruple(rng, tree)),
                      ("tree x tree", lambda: samples.sub_quadruple(rng, prod))):
        worst[name] = min(cat_quadruple_all_splittings(gen(), E).slack for _ in range(n))
    circle = np.array([[min(abs(i - j), 4 - abs(i - j)) for j in range(4)] for i in range(4)], float)
    cv = cat_quadruple_all_splittings(circle, E)
    record_property("detail", " ".join(f"{k} worst={v:.2e}" for k, v in worst.items()) + f" circle={cv.slack:.12f}")
    assert all(v >= -1e-9 for v in worst.values())
    assert not cv.passed and abs(cv.slack + 2.0) <= 1e-9


def test_criterion_3_angle_curvature_gap(record_property):
    # sides at p are drawn from (0, pi/2]; near pi the spherical half fails
    rng = np.random.default_rng(1003)
    worst_s = worst_h = -math.inf
    bad = 0
    for _ in range(100_000):
        gs, gh, b = angle_curvature_gap(*samples.angle_triple(rng))
        worst_s, worst_h = max(worst_s, gs - b), max(worst_h, gh - b)
        bad += gs > b + 1e-12 or gh > b + 1e-12
    record_property("detail", f"violations={bad} max(sphere-bound)={worst_s:.3g} max(hyp-bound)={worst_h:.3g}")
    assert bad == 0


def test_criterion_4_alexandrov(record_property):
    rng = np.random.default_rng(1004)
    bad = {}
    for kappa in (-1, 0, 1):
        cfg = ModelConfig(kappa)
        bad[kappa] = sum(not alexandrov_lemma(*samples.alexandrov_config(rng, kappa), cfg).holds for _ in range(10_000))
    record_property("detail", "violations " + " ".join(f"k={k}:{v}" for k, v in bad.items()))
    assert not any(bad.values())


def test_criterion_5_flag_machinery(record_property):
    t0 = time.perf_counter()
    classes = complex_classes(6)
    mism = sum(is_flag(S)[0] != no_triangle_in_all_links(S)[0] for S in classes)
    rng = np.random.default_rng(1005)
    bary_bad = 0
    for _ in range(200):
        S = samples.random_complex(rng, int(rng.integers(2, 7)), int(rng.integers(1, 5)))
        bary_bad += not is_flag(barycentric_subdivision(S))[0]
    cub_bad = 0
    for S in classes:
        links = cubical_analog(S).vertex_link_masks()
        cub_bad += not bool((links == np.uint64(complex_mask(S))).all())
    elapsed = time.perf_counter() - t0
    record_property("detail", f"{len(classes)} classes: no-trig mismatches={mism} bary non-flag={bary_bad}/200 "
                              f"cubical link mismatches={cub_bad} {elapsed:.1f}s")
    assert mism == 0 and bary_bad == 0 and cub_bad == 0
    assert elapsed < 60


def test_criterion_6_bhv(record_property):
    res = {n: bhv_link_complex(n) for n in (3, 4, 5)}
    record_property("detail", " ".join(f"n={n}: {len(S.vertices)} vertices flag={f[0]}" for n, (S, f) in res.items()))
    for S, (flag, _) in res.values():
        assert flag and is_flag(S)[0]


def test_criterion_7_puff_pastry(record_property):
    rng = np.random.default_rng(1007)
    A, B = HalfSpace([1.0, 0.0], 0.0), HalfSpace([0.0, 1.0], 0.0)
    pairs = [(rng.normal(size=2) * 2, rng.normal(size=2) * 2) for _ in range(1000)]
    good = end_to_end_convex_check(PuffPastry([A, B, A]), pairs, tol=1e-7)
    bad = end_to_end_convex_check(PuffPastry([A, B]), pairs, tol=1e-7)
    normals = [(1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
    P = PuffPastry([HalfSpace(nv, 0.0) for nv in normals])
    err = 0.0
    for _ in range(1000):
        i, j = (int(v) for v in rng.integers(0, 4, 2))
        x, y = rng.normal(size=2) * 2, rng.normal(size=2) * 2
        err = max(err, abs(P.distance(P.lift(i, x), P.lift(j, y)) - halfplane_pastry_distance(normals, i, x, j, y)))
    arrays = [build_bfk_array(k, math.pi / 2) for k in (1, 2, 3)]
    record_property("detail", f"ABA slack in [{good.min_slack:.1e}, {good.worst_slack:.1e}] "
                              f"AB worst={bad.worst_slack:.3f} oracle err={err:.1e} arrays={arrays}")
    assert good.passed and abs(good.worst_slack) <= 1e-7 and abs(good.min_slack) <= 1e-7
    assert not bad.passed and bad.witness is not None
    assert err <= 1e-7
    assert arrays == [(1,), (1, 2, 1), (1, 2, 3, 2, 1)]


def test_criterion_8_billiards(record_property):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1008)
    one = BilliardTable((HalfSpace([0.0, 1.0], 0.0),))
    single = 0
    for _ in range(1000):
        s, d = random_shot(rng, 2)
        s[1] = abs(s[1]) + 1e-3
        single = max(single, simulate(one, s, d).count)
    wedge = {}
    for alpha in (math.pi / 2, math.pi / 3, math.pi / 5, 1.0):
        mism, mx = 0, 0
        for _ in range(1000):
            th, r, phi = rng.uniform(0, alpha), rng.uniform(0.1, 2), rng.uniform(0, 2 * math.pi)
            c, u, b = wedge_reflection_count(alpha, [r * math.cos(th), r * math.sin(th)], [math.cos(phi), math.sin(phi)])
            mism += c != u or c > b
            mx = max(mx, c)
        wedge[round(alpha, 4)] = (mism, mx)
    eps = corner_width_compact(0.5, 1.0).eps
    balls = {}
    for walls in (2, 3):
        worst, count = 0, 0
        for _ in range(100):
            table = random_ball_table(rng, walls, 2)
            for s, d in [random_shot(rng, 2) for _ in range(10)] + notch_shots(rng, table, 2):
                worst = max(worst, simulate(table, s, d).count)
                count += 1
        balls[walls] = (count, worst, collision_bound(walls, eps))
    elapsed = time.perf_counter() - t0
    record_property("detail", f"single wall max={single} wedges(mismatch,max)={wedge} "
                              f"ball tables(trajectories,max,bound)={balls} {elapsed:.1f}s")
    assert single <= 1
    assert all(m == 0 for m, _ in wedge.values())
    assert all(w <= b and c >= 1000 for c, w, b in balls.values())
    assert elapsed < 120


def test_criterion_9_hard_balls(record_property):
    rng = np.random.default_rng(1009)
    events, worst_e, worst_p = 0, 0.0, 0.0
    for k in (2, 3):
        for _ in range(1000):
            sys = random_hard_balls(rng, k)
            run_ = simulate_hard_balls(sys, check=True, tol=1e-8)  # raises on any mismatch
            e0, p0 = sys.energy(), sys.momentum()
            for ev in run_.events:
                v = np.asarray(ev.velocities)
                e1 = 0.5 * float(np.sum(sys.masses[:, None] * v ** 2))
                p1 = (sys.masses[:, None] * v).sum(axis=0)
                worst_e = max(worst_e, abs(e1 - e0) / e0)
                worst_p = max(worst_p, float(np.linalg.norm(p1 - p0)) / max(float(np.linalg.norm(p0)), float(np.sqrt(2 * e0 * sys.masses.sum()))))
                e0, p0 = e1, p1
            events += len(run_.events)
    ident = max(len(simulate_hard_balls(random_hard_balls(rng, 2, identical=True)).events) for _ in range(1000))
    record_property("detail", f"2000 systems, {events} events matched; per-event drift energy={worst_e:.1e} "
                              f"momentum={worst_p:.1e}; identical pair max={ident}")
    assert worst_e <= 1e-12 and worst_p <= 1e-12
    assert ident <= 1


def test_criterion_10_determinism(record_property):
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        code = run(["suite", "--seed", "2024"], io.BytesIO(), buf, io.StringIO())
        outs.append((code, buf.getvalue().encode()))
    same = outs[0][1] == outs[1][1]
    record_property("detail", f"two runs, {len(outs[0][1])} bytes each, identical={same}, exit={outs[0][0]}")
    assert same
    assert outs[0][0] == 0
