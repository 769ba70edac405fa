"""Finite metric spaces and constant-curvature model planes.

The three model planes are represented concretely:

* ``kappa = 0``  -- the Euclidean plane, Cartesian pairs;
* ``kappa = +1`` -- the unit sphere, unit vectors in R^3;
* ``kappa = -1`` -- the hyperbolic plane, upper sheet of the hyperboloid
  ``t^2 - x^2 - y^2 = 1`` in R^3.

Model angles are evaluated with half-angle formulas, which stay accurate
for needle-like and nearly degenerate triangles where the plain law of
cosines loses half of the significant digits.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ModelConfig:
    kappa: int = 0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise ValueError(f"kappa must be -1, 0 or 1, got {self.kappa!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labeled points with a distance matrix.

    Construction only checks shape and finiteness; use
    :func:`validate_metric` for the metric axioms.
    """

    labels: tuple
    dist: np.ndarray

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("distance matrix has NaN or infinite entries")
        labels = tuple(self.labels) if self.labels is not None else tuple(range(len(d)))
        if len(labels) != len(d):
            raise ValueError("number of labels does not match the matrix size")
        d.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", d)

    def __len__(self):
        return len(self.labels)

    def d(self, i, j) -> float:
        return float(self.dist[i, j])

    def subspace(self, idx: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(idx)
        return FiniteMetricSpace([self.labels[i] for i in idx], self.dist[np.ix_(idx, idx)])

    @classmethod
    def from_points(cls, points, labels=None, metric: str = "euclidean") -> "FiniteMetricSpace":
        pts = np.asarray(points, dtype=float)
        if metric == "euclidean":
            diff = pts[:, None, :] - pts[None, :, :]
            d = np.sqrt((diff ** 2).sum(-1))
        elif metric == "sphere":
            d = np.array([[sphere_distance(a, b) for b in pts] for a in pts])
        elif metric == "hyperbolic":
            d = np.array([[hyperbolic_distance(a, b) for b in pts] for a in pts])
        else:
            raise ValueError(f"unknown metric {metric!r}")
        np.fill_diagonal(d, 0.0)
        return cls(labels if labels is not None else list(range(len(pts))), d)

    @classmethod
    def from_dict(cls, obj) -> "FiniteMetricSpace":
        return cls(obj.get("labels"), obj["dist"])

    def to_dict(self):
        return {"labels": list(self.labels), "dist": self.dist.tolist()}

    @classmethod
    def from_json(cls, text: str) -> "FiniteMetricSpace":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class MetricReport:
    ok: bool
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "violations": [list(v) for v in self.violations]}


def validate_metric(m: FiniteMetricSpace, tol: float = DEFAULT_TOL) -> MetricReport:
    """Report every diagonal, symmetry and triangle-inequality violation.

    Violations are tuples ``(kind, labels, excess)``; triangle violations
    ``(a, b, c)`` mean ``d(a,c) > d(a,b) + d(b,c) + tol``.
    """
    d = m.dist
    n = len(m)
    lab = m.labels
    out = []
    for i in range(n):
        if abs(d[i, i]) > tol:
            out.append(("diagonal", (lab[i],), float(abs(d[i, i]))))
        for j in range(i + 1, n):
            if abs(d[i, j] - d[j, i]) > tol:
                out.append(("symmetry", (lab[i], lab[j]), float(abs(d[i, j] - d[j, i]))))
            if d[i, j] < -tol:
                out.append(("negative", (lab[i], lab[j]), float(-d[i, j])))
    for i, k in itertools.combinations(range(n), 2):
        for j in range(n):
            if j == i or j == k:
                continue
            excess = d[i, k] - d[i, j] - d[j, k]
            if excess > tol:
                out.append(("triangle", (lab[i], lab[j], lab[k]), float(excess)))
    return MetricReport(not out, out)


# -- model plane geometry ---------------------------------------------------


def sphere_distance(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))


def _minkowski(u, v) -> float:
    return float(-u[0] * v[0] + u[1] * v[1] + u[2] * v[2])


def hyperbolic_distance(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = u - v
    q = max(_minkowski(w, w), 0.0)
    return 2.0 * math.asinh(math.sqrt(q) / 2.0)


class ModelPlane:
    """Exact geometry of the model plane of curvature ``kappa``."""

    def __init__(self, kappa: int):
        if kappa not in (-1, 0, 1):
            raise ValueError(f"unsupported curvature {kappa!r}")
        self.kappa = kappa

    def polar(self, r: float, theta: float) -> np.ndarray:
        """Point at distance ``r`` from the base point in direction ``theta``."""
        c, s = math.cos(theta), math.sin(theta)
        if self.kappa == 0:
            return np.array([r * c, r * s])
        if self.kappa == 1:
            return np.array([math.cos(r), math.sin(r) * c, math.sin(r) * s])
        return np.array([math.cosh(r), math.sinh(r) * c, math.sinh(r) * s])

    def distance(self, u, v) -> float:
        if self.kappa == 0:
            return float(np.hypot(*(np.asarray(u) - np.asarray(v))))
        if self.kappa == 1:
            return sphere_distance(u, v)
        return hyperbolic_distance(u, v)

    def interpolate(self, u, v, s: float) -> np.ndarray:
        """Point at distance ``s`` from ``u`` along the geodesic to ``v``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        d = self.distance(u, v)
        if d == 0.0:
            return u.copy()
        if self.kappa == 0:
            return u + (s / d) * (v - u)
        if self.kappa == 1:
            return (math.sin(d - s) * u + math.sin(s) * v) / math.sin(d)
        return (math.sinh(d - s) * u + math.sinh(s) * v) / math.sinh(d)

    def reflect_y(self, u) -> np.ndarray:
        """Mirror across the geodesic through the base point at ``theta = 0``."""
        w = np.array(u, dtype=float)
        w[-1] = -w[-1]
        return w


def _triangle_excess(a, b, c):
    """Largest amount by which one side exceeds the sum of the others."""
    return max(a - b - c, b - a - c, c - a - b)


def _check_sides(a, b, c, tol):
    for s in (a, b, c):
        if not math.isfinite(s) or s < -tol:
            raise ValueError(f"side lengths must be finite and nonnegative, got {(a, b, c)}")
    scale = max(1.0, a, b, c)
    if _triangle_excess(a, b, c) > tol * scale:
        raise ValueError(f"side lengths {(a, b, c)} violate the triangle inequality")


def model_angle(opposite: float, adj1: float, adj2: float, cfg: ModelConfig = ModelConfig()) -> Optional[float]:
    """Angle of the model triangle at the vertex between ``adj1`` and ``adj2``.

    Returns ``None`` when the angle is undefined: a zero adjacent side, or a
    spherical triangle with perimeter ``>= 2*pi``.
    """
    a, b, c = float(opposite), float(adj1), float(adj2)
    _check_sides(a, b, c, cfg.tol)
    if b <= 0.0 or c <= 0.0:
        return None
    if cfg.kappa == 1 and a + b + c >= TWO_PI:
        return None
    s = 0.5 * (a + b + c)
    sa = max(0.5 * (b + c - a), 0.0)
    sb = max(0.5 * (a + c - b), 0.0)
    sc = max(0.5 * (a + b - c), 0.0)
    f = {0: lambda t: t, 1: math.sin, -1: math.sinh}[cfg.kappa]
    num = f(sb) * f(sc)
    den = f(s) * f(sa)
    return 2.0 * math.atan2(math.sqrt(max(num, 0.0)), math.sqrt(max(den, 0.0)))


@dataclass(frozen=True)
class ModelTriangle:
    kappa: int
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    sides: tuple

    @property
    def plane(self) -> ModelPlane:
        return ModelPlane(self.kappa)

    def vertices(self):
        return self.p, self.q, self.r

    def angles(self):
        """Angles at p, q, r (``None`` where undefined)."""
        a, b, c = self.sides  # |pq|, |pr|, |qr|
        cfg = ModelConfig(self.kappa)
        return (model_angle(c, a, b, cfg), model_angle(b, a, c, cfg), model_angle(a, b, c, cfg))


def model_triangle(sides, cfg: ModelConfig = ModelConfig()) -> Optional[ModelTriangle]:
    """Realize ``sides = (|pq|, |pr|, |qr|)`` in the model plane.

    ``p`` sits at the base point and ``q`` on the ray ``theta = 0``; ``r``
    lies in the upper half.  Returns ``None`` for spherical triangles with
    perimeter ``>= 2*pi``.
    """
    a, b, c = (float(s) for s in sides)
    _check_sides(a, b, c, cfg.tol)
    a, b, c = max(a, 0.0), max(b, 0.0), max(c, 0.0)
    if cfg.kappa == 1 and a + b + c >= TWO_PI:
        return None
    theta = model_angle(c, a, b, cfg)
    if theta is None:
        theta = 0.0
    plane = ModelPlane(cfg.kappa)
    tri = ModelTriangle(cfg.kappa, plane.polar(0.0, 0.0), plane.polar(a, 0.0), plane.polar(b, theta), (a, b, c))
    scale = max(1.0, a, b, c)
    got = (plane.distance(tri.p, tri.q), plane.distance(tri.p, tri.r), plane.distance(tri.q, tri.r))
    for want, have in zip((a, b, c), got):
        # sqrt-level loss near degenerate triangles is inherent to the input
        if abs(want - have) > max(cfg.tol, 1e-7) * scale:
            raise ArithmeticError(f"model triangle realization drifted: {got} vs {(a, b, c)}")
    return tri


def angle_curvature_gap(px: float, py: float, xy: float):
    """Compare the model angle at ``p`` across the three model planes.

    Returns ``(gap_sphere, gap_hyp, bound)`` with ``bound = |px|*|py|``;
    the spherical and hyperbolic angles never differ from the Euclidean one
    by more than ``bound``.
    """
    e = model_angle(xy, px, py, ModelConfig(0))
    s = model_angle(xy, px, py, ModelConfig(1))
    h = model_angle(xy, px, py, ModelConfig(-1))
    if e is None:
        raise ValueError("model angle undefined: zero side at p")
    if s is None:
        raise ValueError("spherical model triangle undefined (perimeter >= 2*pi)")
    return abs(s - e), abs(h - e), px * py


SIGNS = ("neg", "zero", "pos")


def _sign(x: float, tol: float) -> str:
    if x > tol:
        return "pos"
    if x < -tol:
        return "neg"
    return "zero"


@dataclass(frozen=True)
class AlexandrovSignReport:
    sign_a: str
    sign_b: str
    angle_inequality_slack: float
    value_a: float
    value_b: float
    tol: float

    @property
    def signs_agree(self) -> bool:
        return self.sign_a == self.sign_b

    @property
    def inequality_holds(self) -> bool:
        return self.angle_inequality_slack >= -self.tol

    @property
    def equality_case_consistent(self) -> bool:
        # the slack is second order in the sign values, so "strictly
        # positive" is the right test once the signs are nonzero; below
        # about sqrt(tol) it drowns in rounding and only the inequality counts
        if self.sign_a == "zero" and self.sign_b == "zero":
            return abs(self.angle_inequality_slack) <= self.tol
        if max(abs(self.value_a), abs(self.value_b)) < math.sqrt(self.tol):
            return self.inequality_holds
        return self.angle_inequality_slack > 0.0

    @property
    def holds(self) -> bool:
        return self.signs_agree and self.inequality_holds and self.equality_case_consistent

    def to_dict(self):
        return {
            "sign_a": self.sign_a,
            "sign_b": self.sign_b,
            "angle_inequality_slack": self.angle_inequality_slack,
            "holds": self.holds,
        }


def alexandrov_lemma(px, py, pz, xy, xz, zy, cfg: ModelConfig = ModelConfig()) -> AlexandrovSignReport:
    """Evaluate both sign expressions and the angle inequality.

    ``z`` must lie metrically strictly between ``x`` and ``y``.  The first
    expression is ``angle(x; p, y) - angle(x; p, z)``, the second
    ``angle(z; p, x) + angle(z; p, y) - pi``.
    """
    tol = cfg.tol
    scale = max(1.0, xy)
    if xz <= 0 or zy <= 0:
        raise ValueError("z must differ from x and y")
    if abs(xz + zy - xy) > tol * scale:
        raise ValueError(f"z is not between x and y: |xz|+|zy|={xz + zy} but |xy|={xy}")
    if cfg.kappa == 1 and pz + py + xy >= TWO_PI:
        raise ValueError("spherical case needs |pz|+|py|+|xy| < 2*pi")

    def ang(opp, a1, a2):
        v = model_angle(opp, a1, a2, cfg)
        if v is None:
            raise ValueError("a model triangle in the configuration is undefined")
        return v

    x_pz = ang(pz, px, xz)
    x_py = ang(py, px, xy)
    z_px = ang(px, pz, xz)
    z_py = ang(py, pz, zy)
    p_xy = ang(xy, px, py)
    p_xz = ang(xz, px, pz)
    p_zy = ang(zy, pz, py)
    va = x_py - x_pz
    vb = z_px + z_py - math.pi
    slack = p_xy - p_xz - p_zy
    return AlexandrovSignReport(_sign(va, tol), _sign(vb, tol), slack, va, vb, tol)


# -- Gromov-Hausdorff style distance -----------------------------------------

GH_MAX_POINTS = 8


def _one_sided_distortion(dx: np.ndarray, dy: np.ndarray) -> float:
    """min over maps f of max(0, max_{x,x'} |xx'| - |f(x)f(x')|), branch and bound."""
    n, k = len(dx), len(dy)
    if n <= 1:
        return 0.0
    # assign far-apart points first so pruning bites early
    order = list(np.argsort(-dx.max(axis=1), kind="stable"))
    dxo = dx[np.ix_(order, order)]
    best = [float(dx.max())]  # constant map
    assign = [0] * n

    def rec(i, cur):
        if cur >= best[0]:
            return
        if i == n:
            best[0] = cur
            return
        for y in range(k):
            worst = cur
            for j in range(i):
                e = dxo[i, j] - dy[y, assign[j]]
                if e > worst:
                    worst = e
                    if worst >= best[0]:
                        break
            if worst < best[0]:
                assign[i] = y
                rec(i + 1, worst)

    rec(0, 0.0)
    return max(best[0], 0.0)


def gh_distance_bruteforce(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Least ``eps`` admitting ``eps``-distortion-bounded maps both ways.

    A map ``f: X -> Y`` qualifies when ``|xx'| <= |f(x)f(x')| + eps`` for all
    pairs; the search over maps is exhaustive, so spaces are limited to
    eight points.
    """
    if len(X) > GH_MAX_POINTS or len(Y) > GH_MAX_POINTS:
        raise ValueError(f"brute force limited to {GH_MAX_POINTS} points per space")
    if len(X) == 0 or len(Y) == 0:
        raise ValueError("spaces must be nonempty")
    return max(_one_sided_distortion(X.dist, Y.dist), _one_sided_distortion(Y.dist, X.dist))
