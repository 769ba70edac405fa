"""Reshetnyak puff pastries over arrays of convex bodies in E^m.

Level k is a copy of E^m; levels k-1 and k are glued along the body A^k.
A shortest path from level i to level j (i < j) may be taken to cross
A^{i+1}, ..., A^j once each and in that order: a piece that leaves a level
and comes back through the same interface has both ends in that interface,
so the straight segment between them in the level it left is no longer.
The distance is then a second-order cone program in the crossing points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bodies import ConvexBody

SOLVER_TOL = 1e-12
RESIDUAL_TOL = 1e-8
CONSENSUS_MAX_ITER = 100000


class PastryError(RuntimeError):
    """Solver failure, reported together with the residual reached."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


class EmptyIntersection(ValueError):
    pass


@dataclass(frozen=True)
class LiftedPoint:
    level: int
    point: tuple

    @classmethod
    def of(cls, level: int, point) -> "LiftedPoint":
        return cls(int(level), tuple(float(v) for v in point))

    @property
    def x(self) -> np.ndarray:
        return np.array(self.point)


@dataclass(frozen=True)
class PastryGeodesic:
    start: LiftedPoint
    end: LiftedPoint
    crossings: tuple  # crossing points, one per interface passed
    bodies: tuple  # 1-based interface index of each crossing
    length: float
    residual: float = 0.0

    def vertices(self):
        return [self.start.x, *map(np.asarray, self.crossings), self.end.x]

    def to_dict(self):
        return {
            "start": {"level": self.start.level, "point": list(self.start.point)},
            "end": {"level": self.end.level, "point": list(self.end.point)},
            "crossings": [list(p) for p in self.crossings],
            "bodies": list(self.bodies),
            "length": self.length,
            "residual": self.residual,
        }


def chain_length(points: Sequence) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def _solve(prob):
    import cvxpy as cp

    # "optimal_inaccurate" is accepted here; callers verify the answer
    # themselves by snapping crossing points onto the bodies
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=SOLVER_TOL, tol_gap_rel=SOLVER_TOL,
                   tol_feas=SOLVER_TOL, max_iter=400)


class _ChainProblem:
    """Parametrized SOCP: shortest broken line x -> A_1 -> ... -> A_k -> y."""

    def __init__(self, bodies: Sequence[ConvexBody], dim: int):
        import cvxpy as cp

        k = len(bodies)
        self.x = cp.Parameter(dim)
        self.y = cp.Parameter(dim)
        self.P = cp.Variable((k, dim))
        t = cp.Variable(k + 1)
        nodes = [self.x] + [self.P[l] for l in range(k)] + [self.y]
        cons = [cp.norm(nodes[l + 1] - nodes[l], 2) <= t[l] for l in range(k + 1)]
        for l, b in enumerate(bodies):
            cons += b.cvx_constraints(self.P[l])
        self.prob = cp.Problem(cp.Minimize(cp.sum(t)), cons)

    def solve(self, x, y):
        import cvxpy as cp

        self.x.value = np.asarray(x, dtype=float)
        self.y.value = np.asarray(y, dtype=float)
        try:
            _solve(self.prob)
        except cp.error.SolverError as exc:
            raise PastryError(f"cone solver failed: {exc}") from exc
        if self.prob.status not in ("optimal", "optimal_inaccurate"):
            raise PastryError(f"cone solver status {self.prob.status}")
        return np.array(self.P.value), float(self.prob.value)


def shortest_chain(bodies: Sequence[ConvexBody], x, y, cache: Optional[dict] = None):
    """Shortest broken line from x to y touching each body in turn.

    Returns (crossing points, length, residual).  The crossing points are
    snapped onto their bodies; the residual is the largest snap distance.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if not bodies:
        return np.zeros((0, len(x))), float(np.linalg.norm(x - y)), 0.0
    key = tuple(id(b) for b in bodies)
    prob = cache.get(key) if cache is not None else None
    if prob is None:
        prob = _ChainProblem(bodies, len(x))
        if cache is not None:
            cache[key] = prob
    P, value = prob.solve(x, y)
    snapped = np.array([b.project(p) for b, p in zip(bodies, P)])
    residual = float(np.max(np.linalg.norm(snapped - P, axis=1)))
    length = chain_length([x, *snapped, y])
    residual = max(residual, abs(length - value))
    if residual > RESIDUAL_TOL:
        raise PastryError("crossing points did not converge", residual)
    return snapped, length, residual


class PuffPastry:
    """Array of convex bodies (A^1..A^N) with levels 0..N."""

    def __init__(self, bodies: Sequence[ConvexBody]):
        self.bodies = tuple(bodies)
        if not self.bodies:
            raise ValueError("a puff pastry needs at least one body")
        self.dim = self.bodies[0].dim
        if any(b.dim != self.dim for b in self.bodies):
            raise ValueError("all bodies must share the dimension")
        self._cache = {}

    @property
    def N(self) -> int:
        return len(self.bodies)

    def __repr__(self):
        return f"PuffPastry({list(self.bodies)!r})"

    def __getstate__(self):
        return {"bodies": self.bodies}

    def __setstate__(self, state):
        self.__init__(state["bodies"])

    def lift(self, level: int, x) -> LiftedPoint:
        if not 0 <= level <= self.N:
            raise ValueError(f"level {level} outside 0..{self.N}")
        if len(x) != self.dim:
            raise ValueError("dimension mismatch")
        return LiftedPoint.of(level, x)

    def distance(self, a: LiftedPoint, b: LiftedPoint) -> float:
        return pastry_distance(self, a, b).length


def pastry_distance(P: PuffPastry, a: LiftedPoint, b: LiftedPoint) -> PastryGeodesic:
    """Geodesic between two lifted points of the puff pastry."""
    for pt in (a, b):
        P.lift(pt.level, pt.point)
    lo, hi = (a, b) if a.level <= b.level else (b, a)
    idx = tuple(range(lo.level + 1, hi.level + 1))
    pts, length, residual = shortest_chain([P.bodies[k - 1] for k in idx], lo.x, hi.x, P._cache)
    crossings = tuple(tuple(float(v) for v in p) for p in pts)
    if lo is not a:
        crossings, idx = crossings[::-1], idx[::-1]
    return PastryGeodesic(a, b, crossings, idx, length, residual)


def level_walk_length(P: PuffPastry, levels: Sequence[int], x, y) -> float:
    """Shortest path that visits the given sequence of adjacent levels.

    Used to cross-check the monotone-crossing reduction: walks that go
    back and forth between levels can never beat the monotone one.
    """
    bodies = []
    for u, v in zip(levels, levels[1:]):
        if abs(u - v) != 1:
            raise ValueError("consecutive levels must be adjacent")
        bodies.append(P.bodies[max(u, v) - 1])
    return shortest_chain(bodies, x, y)[1]


def common_point(bodies: Sequence[ConvexBody], start=None, tol: float = 1e-8,
                 max_iter: int = CONSENSUS_MAX_ITER) -> np.ndarray:
    """A point in the intersection of the bodies, by cyclic projections."""
    z = np.zeros(bodies[0].dim) if start is None else np.asarray(start, dtype=float)
    gap = math.inf
    for _ in range(max_iter):
        for b in bodies:
            z = b.project(z)
        gap = max(b.distance(z) for b in bodies)
        if gap <= tol:
            return z
    raise EmptyIntersection(f"alternating projections stalled at gap {gap:.3g}")


def through_intersection(bodies: Sequence[ConvexBody], x, y, cache: Optional[dict] = None):
    """min over z in the common intersection of |x - z| + |z - y|, and the minimizer."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    key = ("meet",) + tuple(id(b) for b in bodies)
    prob = cache.get(key) if cache is not None else None
    if prob is None:
        prob = _MeetProblem(bodies, len(x))
        if cache is not None:
            cache[key] = prob
    return prob.solve(x, y)


class _MeetProblem:
    def __init__(self, bodies, dim):
        import cvxpy as cp

        self.x = cp.Parameter(dim)
        self.y = cp.Parameter(dim)
        self.z = cp.Variable(dim)
        cons = []
        for b in bodies:
            cons += b.cvx_constraints(self.z)
        self.prob = cp.Problem(cp.Minimize(cp.norm(self.x - self.z, 2) + cp.norm(self.z - self.y, 2)), cons)
        self.bodies = bodies

    def solve(self, x, y):
        import cvxpy as cp

        self.x.value, self.y.value = x, y
        try:
            _solve(self.prob)
        except cp.error.SolverError as exc:
            raise PastryError(f"cone solver failed: {exc}") from exc
        if self.prob.status not in ("optimal", "optimal_inaccurate"):
            raise PastryError(f"cone solver status {self.prob.status}")
        z = np.array(self.z.value)
        return float(np.linalg.norm(x - z) + np.linalg.norm(z - y)), z


@dataclass
class ConvexityVerdict:
    passed: bool
    worst_slack: float
    witness: Optional[dict] = None
    samples: int = 0
    common_point: Optional[list] = None
    min_slack: float = math.inf  # negative values would mean a solver error

    def to_dict(self):
        return {"passed": self.passed, "worst_slack": self.worst_slack, "min_slack": self.min_slack,
                "witness": self.witness, "samples": self.samples, "common_point": self.common_point}


def end_to_end_convex_check(P: PuffPastry, pairs, tol: float = 1e-7) -> ConvexityVerdict:
    """Compare bottom-to-top distances with paths forced through the intersection.

    The slack of a pair is (best path through a common point) minus the
    pastry distance between x^0 and y^N; it is never negative, and the
    pastry is end-to-end convex exactly when it vanishes for every pair.
    """
    z0 = common_point(P.bodies)
    worst, witness = -math.inf, None
    least = math.inf
    count = 0
    for x, y in pairs:
        count += 1
        g = pastry_distance(P, P.lift(0, x), P.lift(P.N, y))
        through, z = through_intersection(P.bodies, np.asarray(x, float), np.asarray(y, float), P._cache)
        slack = through - g.length
        least = min(least, slack)
        if slack > worst:
            worst = slack
            witness = {"x": list(map(float, x)), "y": list(map(float, y)), "pastry_length": g.length,
                       "through_intersection": through, "crossings": [list(p) for p in g.crossings],
                       "z": z.tolist()}
    passed = worst <= tol
    return ConvexityVerdict(passed, float(worst), None if passed else witness, count, z0.tolist(), float(least))


def _ceil_pi_over(eps: float) -> int:
    if not 0.0 < eps <= math.pi:
        raise ValueError("angle must lie in (0, pi]")
    # pi / (pi / k) is not always exactly k in floating point
    return math.ceil(math.pi / eps - 1e-9)


def build_bfk_array(n: int, eps: float) -> tuple:
    """Index array j_eps(n) whose puff pastry is end-to-end convex."""
    if n < 1:
        raise ValueError("n must be >= 1")
    L = _ceil_pi_over(eps) + 1
    arr = [1]
    for k in range(1, n):
        out = []
        for j in arr:
            out.extend([k if s % 2 == 0 else k + 1 for s in range(L)] if j == k else [j])
        arr = out
    assert set(arr) == set(range(1, n + 1)) and len(arr) <= L ** n
    return tuple(arr)


def zigzag_length_check(alpha: float):
    """(arc count, total zigzag length, whether it reaches pi)."""
    k = _ceil_pi_over(alpha)
    total = k * alpha
    return k, total, total >= math.pi - 1e-12
