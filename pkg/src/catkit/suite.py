"""Seeded property suite behind ``catkit suite``.

Every check draws from its own child seed, so reports depend only on the
seed and the scale, never on which checks ran before.
"""

from __future__ import annotations

import math

import numpy as np

from . import samples
from .billiards import (BilliardTable, collision_bound, corner_width_compact, notch_shots, random_ball_table,
                        random_hard_balls, random_shot, simulate, simulate_hard_balls, wedge_reflection_count)
from .bodies import HalfSpace
from .cat4 import cat_quadruple_all_splittings, classify_four_point
from .complexes import (barycentric_subdivision, bhv_link_complex, complex_classes, complex_mask,
                        cubical_analog, is_flag, no_triangle_in_all_links)
from .metric import ModelConfig, alexandrov_lemma, angle_curvature_gap
from .pastry import PuffPastry, build_bfk_array, end_to_end_convex_check


def _n(base: int, scale: float) -> int:
    return max(1, int(round(base * scale)))


def check_classify(rng, scale, tol):
    n = _n(1000, scale)
    e = [classify_four_point(samples.euclidean_quadruple(rng)).label for _ in range(n)]
    s = [classify_four_point(samples.sphere_quadruple(rng)).label for _ in range(n)]
    h = [classify_four_point(samples.hyperbolic_quadruple(rng)).label for _ in range(n)]
    stats = {"euclidean_E4": e.count("E4"), "sphere_N4": s.count("N4"), "hyperbolic_P4": h.count("P4"),
             "boundary": e.count("Boundary") + s.count("Boundary") + h.count("Boundary")}
    ok = stats["euclidean_E4"] == n and stats["sphere_N4"] == 0 and stats["hyperbolic_P4"] == 0
    return ok, 3 * n, stats


def check_cat0(rng, scale, tol):
    n = _n(300, scale)
    cfg = ModelConfig(0)
    tree = samples.random_tree_metric(rng)
    prod = samples.product_metric(samples.random_tree_metric(rng, 6), samples.random_tree_metric(rng, 6))
    worst = math.inf
    for _ in range(n):
        for d in (samples.euclidean_quadruple(rng, 4), samples.sub_quadruple(rng, tree),
                  samples.sub_quadruple(rng, prod)):
            worst = min(worst, cat_quadruple_all_splittings(d, cfg).slack)
    circle = np.array([[min(abs(i - j), 4 - abs(i - j)) for j in range(4)] for i in range(4)], float)
    cs = cat_quadruple_all_splittings(circle, cfg).slack
    return worst >= -1e-9 and abs(cs + 2.0) <= 1e-9, 3 * n, {"worst_slack": worst, "circle_slack": cs}


def check_angle_gap(rng, scale, tol):
    n = _n(3000, scale)
    worst = -math.inf
    for _ in range(n):
        gs, gh, b = angle_curvature_gap(*samples.angle_triple(rng))
        worst = max(worst, gs - b, gh - b)
    return worst <= 1e-12, n, {"worst_excess": worst}


def check_alexandrov(rng, scale, tol):
    n = _n(1000, scale)
    bad = 0
    for kappa in (-1, 0, 1):
        cfg = ModelConfig(kappa)
        for _ in range(n):
            bad += not alexandrov_lemma(*samples.alexandrov_config(rng, kappa), cfg).holds
    return bad == 0, 3 * n, {"violations": bad}


def check_flag(rng, scale, tol):
    nv = 5 if scale < 1 else 6
    classes = complex_classes(nv)
    mism = sum(is_flag(S)[0] != no_triangle_in_all_links(S)[0] for S in classes)
    bary_bad = 0
    nb = _n(50, scale)
    for _ in range(nb):
        S = samples.random_complex(rng, int(rng.integers(2, 7)), int(rng.integers(1, 5)))
        bary_bad += not is_flag(barycentric_subdivision(S))[0]
    cub_bad = 0
    for S in classes:
        L = cubical_analog(S).vertex_link_masks()
        cub_bad += not bool((L == np.uint64(complex_mask(S))).all())
    ok = mism == 0 and bary_bad == 0 and cub_bad == 0
    return ok, len(classes), {"vertices": nv, "classes": len(classes), "no_trig_mismatch": mism,
                              "bary_not_flag": bary_bad, "cubical_link_mismatch": cub_bad}


def check_bhv(rng, scale, tol):
    res = {n: bhv_link_complex(n) for n in (3, 4, 5)}
    stats = {f"n{n}": {"vertices": len(S.vertices), "flag": f[0]} for n, (S, f) in res.items()}
    return all(f[0] for _, f in res.values()), 3, stats


def check_pastry(rng, scale, tol):
    n = _n(100, scale)
    A, B = HalfSpace([1.0, 0.0], 0.0), HalfSpace([0.0, 1.0], 0.0)
    # a known shortcut pair for (A,B), so small scales still see the failure
    pairs = [(np.array([-0.5, 3.0]), np.array([1.5, -0.5]))]
    pairs += [(rng.normal(size=2) * 2, rng.normal(size=2) * 2) for _ in range(n - 1)]
    good = end_to_end_convex_check(PuffPastry([A, B, A]), pairs, tol=1e-7)
    bad = end_to_end_convex_check(PuffPastry([A, B]), pairs, tol=1e-7)
    arrays = [build_bfk_array(k, math.pi / 2) for k in (1, 2, 3)]
    ok = (good.passed and abs(good.worst_slack) <= 1e-7 and not bad.passed
          and arrays == [(1,), (1, 2, 1), (1, 2, 3, 2, 1)])
    return ok, 2 * n, {"ABA_worst_slack": good.worst_slack, "AB_worst_slack": bad.worst_slack,
                       "arrays": [list(a) for a in arrays]}


def check_billiards(rng, scale, tol):
    n = _n(200, scale)
    stats = {}
    one = BilliardTable((HalfSpace([0.0, 1.0], 0.0),))
    single = 0
    for _ in range(n):
        s, d = random_shot(rng, 2)
        s[1] = abs(s[1]) + 1e-3
        single = max(single, simulate(one, s, d).count)
    stats["single_wall_max"] = single
    ok = single <= 1
    for alpha in (math.pi / 2, math.pi / 3, math.pi / 5, 1.0):
        mism, mx = 0, 0
        for _ in range(n):
            th, r, phi = rng.uniform(0, alpha), rng.uniform(0.1, 2), rng.uniform(0, 2 * math.pi)
            c, u, b = wedge_reflection_count(alpha, [r * math.cos(th), r * math.sin(th)],
                                             [math.cos(phi), math.sin(phi)])
            mism += c != u or c > b
            mx = max(mx, c)
        stats[f"wedge_{alpha:.4f}"] = {"mismatch": mism, "max": mx}
        ok = ok and mism == 0
    eps = corner_width_compact(0.5, 1.0).eps
    for walls in (2, 3):
        worst = 0
        for _ in range(max(1, n // 20)):
            table = random_ball_table(rng, walls, 2)
            shots = [random_shot(rng, 2) for _ in range(20)] + notch_shots(rng, table, 2)
            for s, d in shots:
                worst = max(worst, simulate(table, s, d).count)
        stats[f"balls_{walls}"] = {"max_events": worst, "bound": collision_bound(walls, eps)}
        ok = ok and worst <= collision_bound(walls, eps)
    return ok, n * 5, stats


def check_hard_balls(rng, scale, tol):
    n = _n(100, scale)
    events = 0
    ident = 0
    for k in (2, 3):
        for _ in range(n):
            run = simulate_hard_balls(random_hard_balls(rng, k))
            events += len(run.events)
    for _ in range(n):
        ident = max(ident, len(simulate_hard_balls(random_hard_balls(rng, 2, identical=True)).events))
    return ident <= 1, 3 * n, {"events": events, "identical_pair_max": ident}


CHECKS = [
    ("four-point-classes", check_classify),
    ("cat0-quadruples", check_cat0),
    ("angle-curvature-gap", check_angle_gap),
    ("alexandrov", check_alexandrov),
    ("flag-machinery", check_flag),
    ("bhv-flag", check_bhv),
    ("puff-pastry", check_pastry),
    ("billiards", check_billiards),
    ("hard-balls", check_hard_balls),
]


def run_suite(seed: int, scale: float = 1.0, tol: float = 1e-9, only=None):
    """Yield one report row per check."""
    children = np.random.SeedSequence(seed).spawn(len(CHECKS))
    for (name, fn), child in zip(CHECKS, children):
        if only and name not in only:
            continue
        try:
            ok, cases, stats = fn(np.random.default_rng(child), scale, tol)
            row = {"check": name, "passed": bool(ok), "cases": cases, "stats": stats}
        except Exception as exc:  # reported, never swallowed silently
            row = {"check": name, "passed": False, "error": f"{type(exc).__name__}: {exc}"}
        yield row
