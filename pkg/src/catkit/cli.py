"""``catkit`` command line: one subcommand group per module, JSONL reports.

Exit status: 0 when every asserted property held, 1 when one failed,
2 for usage or input errors, 3 when a computation or worker crashed.
"""

from __future__ import annotations

import argparse
import io as _io
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import samples
from .io import InputError, dumps, load_json, read_jsonl, require, to_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CRASH = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- parsing helpers -----------------------------------------------------------

_ANGLE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*(pi)?\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_angle(text: str) -> float:
    """Accept plain numbers and forms like ``pi/3``, ``2pi/5``, ``0.5*pi``."""
    m = _ANGLE.match(text)
    if not m or not (m.group(1) or m.group(2)):
        raise UsageError(f"cannot parse angle {text!r}")
    coef = float(m.group(1)) if m.group(1) not in ("", None) else 1.0
    val = coef * (math.pi if m.group(2) else 1.0)
    if m.group(3):
        val /= float(m.group(3))
    return val


def parse_ints(text: str):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_lifted(text: str):
    """``level:x1,x2,...``"""
    try:
        level, coords = text.split(":", 1)
        return int(level), [float(t) for t in coords.split(",")]
    except ValueError:
        raise UsageError(f"expected level:x1,x2,..., got {text!r}") from None


def read_objects(path, stdin):
    """JSON objects from a file or stdin: a JSON document, a JSON list, or JSONL."""
    if path in (None, "-"):
        raw, source = stdin.read(), "<stdin>"
    else:
        with open(path, "rb") as fh:
            raw, source = fh.read(), path
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        return list(read_jsonl(_io.BytesIO(raw).readlines(), source)), source
    return (doc if isinstance(doc, list) else [doc]), source


def pmap(fn, items, workers: int):
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        for it in items:
            yield fn(it)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers)))


# -- output --------------------------------------------------------------------


class Emitter:
    """Streams case rows; JSONL rows are flushed as they arrive."""

    def __init__(self, args, stdout):
        self.fmt = args.format
        self.out_path = args.out
        if self.fmt == "svg" and not self.out_path:
            raise UsageError("--format svg needs --out PATH for the figure")
        self.stream = stdout
        self._fh = None
        if self.fmt in ("json", "csv") and self.out_path:
            self._fh = open(self.out_path, "w", encoding="utf-8")
            self.stream = self._fh
        self.rows = []

    def row(self, r):
        if self.fmt == "csv":
            self.rows.append(r)
        else:
            self.stream.write(dumps(r) + "\n")
            self.stream.flush()

    def close(self, summary):
        if self.fmt == "csv":
            self.stream.write(to_csv(self.rows + [summary]))
        else:
            self.stream.write(dumps(summary) + "\n")
        self.stream.flush()
        if self._fh:
            self._fh.close()


def _config(args):
    return {"seed": args.seed, "tol": args.tol, "workers": args.workers, "format": args.format}


# -- metric ----------------------------------------------------------------------


def cmd_metric(args, em, stdin):
    from .metric import FiniteMetricSpace, ModelConfig, alexandrov_lemma, angle_curvature_gap, \
        gh_distance_bruteforce, validate_metric

    ok = True
    if args.action == "validate":
        objs, src = read_objects(args.input, stdin)
        for k, o in enumerate(objs):
            require(o, "dist", src)
            m = FiniteMetricSpace.from_dict(o)
            rep = validate_metric(m, args.tol)
            em.row({"case": k, **rep.to_dict()})
            ok &= rep.ok
        return ok, {"cases": len(objs)}
    if args.action == "gh":
        if not (args.x and args.y):
            raise UsageError("metric gh needs --x and --y")
        X = FiniteMetricSpace.from_dict(load_json(args.x))
        Y = FiniteMetricSpace.from_dict(load_json(args.y))
        d = gh_distance_bruteforce(X, Y)
        em.row({"distance": d})
        return True, {"distance": d}
    objs, src = read_objects(args.input, stdin)
    if args.action == "angle-gap":
        for k, o in enumerate(objs):
            gs, gh, b = angle_curvature_gap(*(float(require(o, f, src)) for f in ("px", "py", "xy")))
            within = gs <= b + args.tol and gh <= b + args.tol
            em.row({"case": k, "gap_sphere": gs, "gap_hyp": gh, "bound": b, "within_bound": within})
            ok &= within
        return ok, {"cases": len(objs)}
    # alexandrov
    cfg = ModelConfig(args.kappa, args.tol)
    for k, o in enumerate(objs):
        rep = alexandrov_lemma(*(float(require(o, f, src)) for f in ("px", "py", "pz", "xy", "xz", "zy")), cfg)
        em.row({"case": k, **rep.to_dict()})
        ok &= rep.holds
    return ok, {"cases": len(objs)}


# -- cat4 --------------------------------------------------------------------------


def _quad_input(o, src):
    from .cat4 import Quadruple

    if "dist" in o:
        return np.asarray(o["dist"], dtype=float)
    try:
        return Quadruple.from_dict(o)
    except KeyError as exc:
        raise InputError(f"{src}: quadruple is missing {exc}") from None


def cmd_cat4(args, em, stdin):
    from .cat4 import Quadruple, cat_quadruple, cat_quadruple_all_splittings, classify_four_point
    from .metric import ModelConfig

    if args.action == "sample":
        rng = np.random.default_rng(args.seed)
        gen = {
            "euclidean": lambda: samples.euclidean_quadruple(rng),
            "sphere": lambda: samples.sphere_quadruple(rng),
            "hyperbolic": lambda: samples.hyperbolic_quadruple(rng),
            "tree": lambda: samples.sub_quadruple(rng, samples.random_tree_metric(rng)),
        }[args.source]
        for _ in range(args.count):
            em.row({"dist": gen().tolist()})
        return True, {"cases": args.count, "source": args.source}
    objs, src = read_objects(args.input, stdin)
    quads = [_quad_input(o, src) for o in objs]
    if args.action == "check":
        cfg = ModelConfig(args.kappa, args.tol)
        ok, worst = True, math.inf
        for k, q in enumerate(quads):
            v = cat_quadruple(q, cfg) if isinstance(q, Quadruple) else cat_quadruple_all_splittings(q, cfg)
            em.row({"case": k, **v.to_dict()})
            ok &= v.passed
            worst = min(worst, v.slack)
        return ok, {"cases": len(quads), "worst_slack": worst}
    labels, dists, counts = [], [], {}
    for k, q in enumerate(quads):
        d = q.matrix() if isinstance(q, Quadruple) else q
        c = classify_four_point(d, args.tol)
        em.row({"case": k, **c.to_dict()})
        labels.append(c.label)
        dists.append(d)
        counts[c.label] = counts.get(c.label, 0) + 1
    if args.format == "svg" and dists:
        from .plotting import plot_four_point

        plot_four_point(dists, labels, args.out)
    return True, {"cases": len(quads), "classes": dict(sorted(counts.items()))}


# -- complex -----------------------------------------------------------------------


def cmd_complex(args, em, stdin):
    from .complexes import (SimplicialComplex, all_right_cat1_verdict, barycentric_subdivision,
                            bhv_link_complex, cubical_analog, cubical_vertex_link, is_flag, is_isomorphic, link)

    if args.action == "bhv":
        S, (flag, wit) = bhv_link_complex(args.n)
        row = {"n": args.n, "vertices": len(S.vertices), "maximal": len(S.maximal),
               "f_vector": S.f_vector(), "flag": flag}
        if args.witness:
            row["witness"] = wit
        em.row(row)
        return flag, {"n": args.n}
    objs, src = read_objects(args.input, stdin)
    ok = True
    for k, o in enumerate(objs):
        try:
            S = SimplicialComplex.from_dict(o)
        except (KeyError, TypeError) as exc:
            raise InputError(f"{src}: complex {k} is malformed ({exc})") from None
        if args.action == "flag":
            flag, wit = is_flag(S)
            row = {"case": k, "flag": flag}
            if args.witness:
                v = all_right_cat1_verdict(S)
                row["witness"] = list(wit) if wit else None
                row["cat1"] = v.to_dict()
            em.row(row)
        elif args.action == "link":
            if args.simplex is None:
                raise UsageError("complex link needs --simplex")
            sigma = [json.loads(t) if t.strip().lstrip("-").isdigit() else t.strip()
                     for t in args.simplex.split(",")]
            em.row({"case": k, "simplex": sigma, "link": link(S, sigma).to_dict()})
        elif args.action == "bary":
            B = barycentric_subdivision(S)
            flag = is_flag(B)[0]
            em.row({"case": k, "subdivision": B.to_dict(), "flag": flag})
            ok &= flag
        else:  # cubical
            Q = cubical_analog(S)
            N = len(S.vertices)
            good = True
            if N <= 6:
                masks = Q.vertex_link_masks()
                good = bool(np.all(masks == masks[0]))
            good = good and is_isomorphic(cubical_vertex_link(Q, 0), S) is not None
            em.row({"case": k, "N": N, "f_vector": Q.f_vector(), "links_reproduce": good,
                    **({"cubical": Q.to_dict()} if args.witness else {})})
            ok &= good
    return ok, {"cases": len(objs)}


# -- pastry ------------------------------------------------------------------------


def _load_bodies(path):
    from .bodies import body_from_dict

    doc = load_json(path)
    items = doc["bodies"] if isinstance(doc, dict) and "bodies" in doc else doc
    if not isinstance(items, list):
        raise InputError(f"{path}: expected a list of bodies")
    try:
        return [body_from_dict(b) for b in items]
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: bad body ({exc})") from None


def _pastry_from_args(args):
    from .pastry import PuffPastry

    if not args.bodies:
        raise UsageError("--bodies is required")
    bodies = _load_bodies(args.bodies)
    arr = parse_ints(args.array) if args.array else list(range(1, len(bodies) + 1))
    if any(not 1 <= j <= len(bodies) for j in arr):
        raise UsageError("--array entries must index the bodies file (1-based)")
    return PuffPastry([bodies[j - 1] for j in arr]), arr


def _pastry_shard(job):
    from .pastry import end_to_end_convex_check

    P, pairs, tol = job
    return end_to_end_convex_check(P, pairs, tol)


def cmd_pastry(args, em, stdin):
    from .pastry import build_bfk_array, pastry_distance

    if args.action == "bfk-array":
        eps = parse_angle(args.eps)
        arr = build_bfk_array(args.n, eps)
        em.row({"n": args.n, "eps": eps, "array": list(arr), "length": len(arr)})
        return True, {"length": len(arr)}
    P, arr = _pastry_from_args(args)
    if args.action == "dist":
        if not (args.src and args.dst):
            raise UsageError("pastry dist needs --from and --to")
        (la, xa), (lb, xb) = parse_lifted(args.src), parse_lifted(args.dst)
        g = pastry_distance(P, P.lift(la, xa), P.lift(lb, xb))
        em.row(g.to_dict())
        return True, {"length": g.length}
    rng = np.random.default_rng(args.seed)
    pairs = [(rng.normal(size=P.dim) * args.spread, rng.normal(size=P.dim) * args.spread)
             for _ in range(args.samples)]
    tol = args.tol if args.tol != DEFAULT_TOL else 1e-7
    shards = np.array_split(np.arange(len(pairs)), max(1, args.workers))
    jobs = [(P, [pairs[i] for i in s], tol) for s in shards if len(s)]
    verdicts = list(pmap(_pastry_shard, jobs, args.workers))
    worst = max(verdicts, key=lambda v: v.worst_slack)
    passed = all(v.passed for v in verdicts)
    row = {"array": arr, "samples": len(pairs), "verdict": "PASS" if passed else "FAIL",
           "worst_slack": worst.worst_slack, "common_point": worst.common_point}
    if not passed:
        row["witness"] = worst.witness
    em.row(row)
    return passed, {"verdict": row["verdict"]}


# -- billiards ---------------------------------------------------------------------


def _trajectory_checks(table, traj, tol=1e-9):
    """Speed and reflection law at every event."""
    d_in = np.asarray(traj.direction)
    for e in traj.events:
        d_out = np.asarray(e.direction)
        n = table.walls[e.wall].normal(np.asarray(e.point))
        if abs(np.linalg.norm(d_out) - 1.0) > 1e-12 * (1 + len(traj.events)):
            return False
        if abs(float(d_in @ n) + float(d_out @ n)) > tol:
            return False
        if np.linalg.norm((d_in - (d_in @ n) * n) - (d_out - (d_out @ n) * n)) > tol:
            return False
        d_in = d_out
    return True


def _billiard_trial(job):
    from .billiards import BilliardTable, simulate

    table_dict, seq, radius, max_events, horizon = job
    table = BilliardTable.from_dict(table_dict)
    rng = np.random.default_rng(seq)
    dim = table.dim
    while True:
        s = rng.uniform(-radius, radius, dim)
        if np.linalg.norm(s) <= radius and table.wall_containing(s, 1e-9) is None:
            break
    d = rng.normal(size=dim)
    d /= np.linalg.norm(d)
    traj = simulate(table, s, d, max_events, horizon)
    return traj, _trajectory_checks(table, traj)


def cmd_billiard(args, em, stdin):
    from .billiards import (BilliardTable, collision_bound, corner_width_compact, wedge_reflection_count,
                            WedgeError)

    if args.action == "bound":
        eps = parse_angle(args.eps)
        b = collision_bound(args.n, eps)
        em.row({"n": args.n, "eps": eps, "bound": b})
        return True, {"bound": b}
    rng = np.random.default_rng(args.seed)
    if args.action == "wedge":
        alpha = parse_angle(args.alpha)
        ok, mx, skipped = True, 0, 0
        for k in range(args.trials):
            th, r, phi = rng.uniform(0, alpha), rng.uniform(0.1, 2), rng.uniform(0, 2 * math.pi)
            try:
                c, u, b = wedge_reflection_count(alpha, [r * math.cos(th), r * math.sin(th)],
                                                 [math.cos(phi), math.sin(phi)])
            except WedgeError:
                skipped += 1
                continue
            good = c == u and c <= b
            em.row({"trial": k, "simulated": c, "unfolding": u, "bound": b, "ok": good})
            ok &= good
            mx = max(mx, c)
        return ok, {"trials": args.trials, "max_events": mx, "skipped": skipped}
    if not args.table:
        raise UsageError("billiard run needs --table")
    doc = load_json(args.table)
    try:
        table = BilliardTable.from_dict(doc)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{args.table}: bad table ({exc})") from None
    if table.dim is None:
        raise InputError(f"{args.table}: table has no walls")
    bound = None
    if args.eps:
        bound = collision_bound(len(table.walls), parse_angle(args.eps))
    elif args.r1 is not None and args.r2 is not None:
        bound = collision_bound(len(table.walls), corner_width_compact(args.r1, args.r2).eps)
    horizon = args.horizon if args.horizon is not None else math.inf
    seqs = np.random.SeedSequence(args.seed).spawn(args.trials)
    jobs = [(table.to_dict(), s, args.radius, args.max_events, horizon) for s in seqs]
    ok, mx, terms, plotted = True, 0, {}, []
    for k, (traj, good) in enumerate(pmap(_billiard_trial, jobs, args.workers)):
        if args.events:
            for e in traj.events:
                em.row({"trial": k, **e.to_dict()})
        else:
            em.row({"trial": k, "events": traj.count, "termination": traj.termination, "laws_ok": good})
        ok &= good and (bound is None or traj.count <= bound)
        mx = max(mx, traj.count)
        terms[traj.termination] = terms.get(traj.termination, 0) + 1
        if len(plotted) < 25:
            plotted.append(traj)
    if args.format == "svg":
        from .plotting import plot_table

        plot_table(table, plotted, args.out)
    return ok, {"trials": args.trials, "max_events": mx, "bound": bound, "terminations": dict(sorted(terms.items()))}


def _hardball_trial(job):
    from .billiards import CrossCheckError, random_hard_balls, simulate_hard_balls

    n, seq, horizon, max_events = job
    rng = np.random.default_rng(seq)
    sys_ = random_hard_balls(rng, n)
    try:
        run = simulate_hard_balls(sys_, horizon, max_events)
        return {"events": len(run.events), "termination": run.termination, "cross_check": True,
                "energy_drift": abs(run.final.energy() - sys_.energy()) / max(sys_.energy(), 1e-300)}
    except CrossCheckError as exc:
        return {"events": None, "termination": None, "cross_check": False, "error": str(exc)}


def cmd_hardballs(args, em, stdin):
    from .billiards import HardBallSystem, hard_ball_to_billiard, simulate_hard_balls

    horizon = args.horizon if args.horizon is not None else math.inf
    if args.system:
        try:
            sys_ = HardBallSystem.from_dict(load_json(args.system))
        except (KeyError, TypeError) as exc:
            raise InputError(f"{args.system}: bad system ({exc})") from None
        if args.action == "reduce":
            em.row(hard_ball_to_billiard(sys_).to_dict())
            return True, {"balls": sys_.n}
        run = simulate_hard_balls(sys_, horizon, args.max_events)
        for e in run.events:
            em.row(e.to_dict())
        return True, {"events": len(run.events), "termination": run.termination}
    if args.action == "reduce":
        raise UsageError("hardballs reduce needs --system")
    seqs = np.random.SeedSequence(args.seed).spawn(args.trials)
    jobs = [(args.balls, s, horizon, args.max_events) for s in seqs]
    ok, events = True, 0
    for k, row in enumerate(pmap(_hardball_trial, jobs, args.workers)):
        good = row["cross_check"] and row["energy_drift"] <= 1e-12 * max(1, row["events"])
        em.row({"trial": k, **row, "ok": good})
        ok &= good
        events += row["events"] or 0
    return ok, {"trials": args.trials, "balls": args.balls, "events": events}


# -- suite ---------------------------------------------------------------------------


def cmd_suite(args, em, stdin):
    from .suite import run_suite

    only = set(args.only.split(",")) if args.only else None
    ok, n = True, 0
    for row in run_suite(args.seed, args.scale, args.tol, only):
        em.row(row)
        ok &= row["passed"]
        n += 1
    return ok, {"checks": n}


# -- parser --------------------------------------------------------------------------

DEFAULT_TOL = 1e-9


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    env_seed = os.environ.get("CATKIT_SEED")
    common.add_argument("--seed", type=int, default=int(env_seed) if env_seed else 0,
                        help="RNG seed (falls back to $CATKIT_SEED, then 0)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    common.add_argument("--out", default=None, help="output file (the figure for --format svg)")

    p = argparse.ArgumentParser(prog="catkit", description="CAT(k) comparison geometry toolkit")
    sub = p.add_subparsers(dest="group", required=True)

    m = sub.add_parser("metric", parents=[common])
    m.add_argument("action", choices=("validate", "gh", "angle-gap", "alexandrov"))
    m.add_argument("--input")
    m.add_argument("--x")
    m.add_argument("--y")
    m.add_argument("--kappa", type=int, choices=(-1, 0, 1), default=0)

    c = sub.add_parser("cat4", parents=[common])
    c.add_argument("action", choices=("check", "classify", "sample"))
    c.add_argument("--kappa", type=int, choices=(-1, 0, 1), default=0)
    c.add_argument("--input")
    c.add_argument("--source", choices=("euclidean", "sphere", "hyperbolic", "tree"), default="euclidean")
    c.add_argument("--count", type=int, default=10)

    x = sub.add_parser("complex", parents=[common])
    x.add_argument("action", choices=("flag", "link", "bary", "cubical", "bhv"))
    x.add_argument("--input")
    x.add_argument("--simplex")
    x.add_argument("--n", type=int, default=4)
    x.add_argument("--witness", action="store_true")

    q = sub.add_parser("pastry", parents=[common])
    q.add_argument("action", choices=("dist", "check", "bfk-array"))
    q.add_argument("--bodies")
    q.add_argument("--array")
    q.add_argument("--from", dest="src")
    q.add_argument("--to", dest="dst")
    q.add_argument("--samples", type=int, default=100)
    q.add_argument("--spread", type=float, default=2.0)
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--eps", default="pi/2")

    b = sub.add_parser("billiard", parents=[common])
    b.add_argument("action", choices=("run", "bound", "wedge"))
    b.add_argument("--table")
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--max-events", type=int, default=10000)
    b.add_argument("--horizon", type=float)
    b.add_argument("--radius", type=float, default=3.0, help="start points are drawn from this ball")
    b.add_argument("--events", action="store_true", help="one JSONL line per event")
    b.add_argument("--eps", help="certified corner width; enables the collision-bound check")
    b.add_argument("--r1", type=float)
    b.add_argument("--r2", type=float)
    b.add_argument("--n", type=int, default=1)
    b.add_argument("--alpha", default="pi/2")

    h = sub.add_parser("hardballs", parents=[common])
    h.add_argument("action", choices=("run", "reduce"))
    h.add_argument("--system")
    h.add_argument("--balls", type=int, default=3)
    h.add_argument("--trials", type=int, default=100)
    h.add_argument("--horizon", type=float)
    h.add_argument("--max-events", type=int, default=10000)

    s = sub.add_parser("suite", parents=[common])
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--only", help="comma-separated check names")
    return p


COMMANDS = {"metric": cmd_metric, "cat4": cmd_cat4, "complex": cmd_complex, "pastry": cmd_pastry,
            "billiard": cmd_billiard, "hardballs": cmd_hardballs, "suite": cmd_suite}


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.workers < 1:
        stderr.write("catkit: --workers must be positive\n")
        return EXIT_USAGE
    try:
        em = Emitter(args, stdout)
    except (UsageError, OSError) as exc:
        stderr.write(f"catkit: {exc}\n")
        return EXIT_USAGE
    summary = {"command": argv, "config": _config(args)}
    try:
        passed, stats = COMMANDS[args.group](args, em, stdin)
    except (UsageError, InputError) as exc:
        stderr.write(f"catkit: {exc}\n")
        em.close({**summary, "passed": False, "error": str(exc)})
        return EXIT_USAGE
    except BrokenPipeError:
        raise
    except Exception as exc:
        stderr.write(f"catkit: {type(exc).__name__}: {exc}\n")
        em.close({**summary, "passed": False, "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_CRASH
    em.close({**summary, "summary": stats, "passed": bool(passed)})
    return EXIT_OK if passed else EXIT_FAIL


def main() -> None:
    try:
        code = run()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error here
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
