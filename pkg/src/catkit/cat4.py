"""Four-point CAT(kappa) comparison, 4-point classification, thin triangles."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Optional

import numpy as np

from .metric import TWO_PI, ModelConfig, ModelPlane, model_angle, model_triangle

GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Picture combinatorics of the indefinite classes.  Projecting the
# reference tetrahedron along a vector with W(v) < 0 shows either one vertex
# inside the triangle of the other three, or four vertices in convex
# position.  Which picture is which class is fixed by calibration against
# intrinsic samples (see calibrate_pictures): hyperbolic quadruples always
# give the "inside" picture, spherical ones the "convex" picture.
PICTURE_CLASS = {"inside": "N4", "convex": "P4"}


@dataclass(frozen=True)
class Quadruple:
    """Six distances among p, q (outer pair) and x, y (shared side)."""

    pq: float
    px: float
    py: float
    qx: float
    qy: float
    xy: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"distance {f.name}={v!r} must be finite and nonnegative")

    def as_tuple(self):
        return (self.pq, self.px, self.py, self.qx, self.qy, self.xy)

    def triangle_defect(self) -> float:
        """Largest triangle-inequality violation over the four sub-triples."""
        m = self.matrix()
        worst = 0.0
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    worst = max(worst, m[i, k] - m[i, j] - m[j, k])
        return worst

    def matrix(self) -> np.ndarray:
        """Distance matrix in point order (p, q, x, y)."""
        pq, px, py, qx, qy, xy = self.as_tuple()
        return np.array([[0, pq, px, py], [pq, 0, qx, qy], [px, qx, 0, xy], [py, qy, xy, 0]], dtype=float)

    @classmethod
    def from_matrix(cls, m, p=0, q=1, x=2, y=3) -> "Quadruple":
        m = np.asarray(m, dtype=float)
        return cls(*(float(m[i, j]) for i, j in ((p, q), (p, x), (p, y), (q, x), (q, y), (x, y))))

    @classmethod
    def from_dict(cls, obj) -> "Quadruple":
        return cls(*(float(obj[k]) for k in ("pq", "px", "py", "qx", "qy", "xy")))

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class CatVerdict:
    passed: bool
    witness_t: Optional[float]
    slack: float
    splitting: Optional[tuple] = None

    def to_dict(self):
        return {
            "pass": self.passed,
            "witness_t": self.witness_t,
            "slack": self.slack if math.isfinite(self.slack) else None,
            "splitting": list(self.splitting) if self.splitting else None,
        }


def _kahan_area(a, b, c) -> float:
    a, b, c = sorted((a, b, c), reverse=True)
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(prod, 0.0))


def _euclid_apex(side_x, side_y, base):
    """Coordinates of a point at distances side_x, side_y from (0,0), (base,0)."""
    u = (side_x * side_x + base * base - side_y * side_y) / (2.0 * base)
    h = 2.0 * _kahan_area(side_x, side_y, base) / base
    return u, h


def _min_sum_euclid(pq, px, py, qx, qy, xy):
    if xy == 0.0:
        return 0.0, px + qx
    up, hp = _euclid_apex(px, py, xy)
    uq, hq = _euclid_apex(qx, qy, xy)
    hs = hp + hq
    # the segment from p to the mirror image of q crosses the line here
    u = up + (uq - up) * (hp / hs) if hs > 0 else 0.5 * (up + uq)
    u = min(max(u, 0.0), xy)
    return u / xy, math.hypot(up - u, hp) + math.hypot(uq - u, hq)


def _golden_min(f, lo, hi, tol):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    t = 0.5 * (a + b)
    return t, f(t)


def _min_sum_curved(px, py, qx, qy, xy, cfg):
    plane = ModelPlane(cfg.kappa)
    if xy == 0.0:
        return 0.0, px + qx
    tp = model_angle(py, px, xy, cfg) or 0.0
    tq = model_angle(qy, qx, xy, cfg) or 0.0
    pt = plane.polar(px, tp)
    qt = plane.polar(qx, -tq)

    def f(s):
        z = plane.polar(s, 0.0)
        return plane.distance(pt, z) + plane.distance(z, qt)

    grid = np.linspace(0.0, xy, 65)
    vals = [f(s) for s in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    s, v = _golden_min(f, lo, hi, GOLDEN_TOL * max(1.0, xy))
    for cand in (0.0, xy, grid[i]):
        fv = f(cand)
        if fv < v:
            s, v = cand, fv
    return float(s) / xy, float(v)


def _canonical(q: Quadruple):
    """Representative under p<->q and x<->y; second item says whether x, y swapped."""
    pq, px, py, qx, qy, xy = q.as_tuple()
    variants = [
        ((pq, px, py, qx, qy, xy), False),
        ((pq, qx, qy, px, py, xy), False),
        ((pq, py, px, qy, qx, xy), True),
        ((pq, qy, qx, py, px, xy), True),
    ]
    return min(variants)


def cat_quadruple(q: Quadruple, cfg: ModelConfig = ModelConfig()) -> CatVerdict:
    """CAT(kappa) comparison for one role assignment.

    Model triangles for (p, x, y) and (q, x, y) are laid on opposite sides
    of the common side; the verdict compares ``|pq|`` with the minimum of
    ``|p z| + |z q|`` over ``z`` on that side.  For ``kappa = 1`` a quadruple
    with an undefined model triangle passes automatically.
    """
    defect = q.triangle_defect()
    if defect > cfg.tol * max(1.0, max(q.as_tuple())):
        raise ValueError(f"distances violate the triangle inequality by {defect:g}")
    (pq, px, py, qx, qy, xy), flipped = _canonical(q)
    if cfg.kappa == 1 and (px + py + xy >= TWO_PI or qx + qy + xy >= TWO_PI):
        return CatVerdict(True, None, math.inf)
    if cfg.kappa == 0:
        t, m = _min_sum_euclid(pq, px, py, qx, qy, xy)
    else:
        t, m = _min_sum_curved(px, py, qx, qy, xy, cfg)
    if flipped:
        t = 1.0 - t
    slack = float(m - pq)
    return CatVerdict(slack >= -cfg.tol, t, slack)


SPLITTINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def cat_quadruple_all_splittings(dist, cfg: ModelConfig = ModelConfig()) -> CatVerdict:
    """Worst verdict over the three ways to split four points into {p,q} | {x,y}.

    ``dist`` is a 4x4 distance matrix.
    """
    m = np.asarray(dist, dtype=float)
    if m.shape != (4, 4):
        raise ValueError("expected a 4x4 distance matrix")
    worst = None
    for (p, qq), (x, y) in SPLITTINGS:
        v = cat_quadruple(Quadruple.from_matrix(m, p, qq, x, y), cfg)
        v = CatVerdict(v.passed, v.witness_t, v.slack, (p, qq, x, y))
        if worst is None or v.slack < worst.slack:
            worst = v
    return worst


# -- 4-point classification -------------------------------------------------


@dataclass(frozen=True)
class FourPointClass:
    label: str  # E4, P4, N4 or Boundary
    eigenvalues: tuple
    picture: Optional[str] = None
    inner_vertex: Optional[int] = None

    def to_dict(self):
        return {
            "class": self.label,
            "eigenvalues": list(self.eigenvalues),
            "picture": self.picture,
            "inner_vertex": self.inner_vertex,
        }


def quadratic_form(dist) -> np.ndarray:
    """The form W on R^3 with W(x_i - x_j) = |x_i x_j|^2 for the tetrahedron 0, e1, e2, e3."""
    d = np.asarray(dist, dtype=float)
    d2 = d * d
    return 0.5 * (d2[0, 1:, None] + d2[0, None, 1:] - d2[1:, 1:])


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def projection_picture(points2d):
    """'inside' with the index of the enclosed point, or ('convex', None)."""
    for i in range(4):
        a, b, c = (points2d[j] for j in range(4) if j != i)
        p = points2d[i]
        s1, s2, s3 = _orient(a, b, p), _orient(b, c, p), _orient(c, a, p)
        if (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0):
            return "inside", i
    return "convex", None


def classify_four_point(dist, tol: float = 1e-9) -> FourPointClass:
    """Classify a 4-point metric space as E4, P4, N4 or Boundary.

    ``dist`` is a 4x4 distance matrix.  The form W is positive definite for
    non-degenerate Euclidean quadruples; a smallest eigenvalue within
    ``tol * trace(W)`` of zero is reported as Boundary.
    """
    W = quadratic_form(dist)
    evals, evecs = np.linalg.eigh(W)
    scale = float(np.trace(W))
    ev = tuple(float(e) for e in evals)
    if scale <= 0 or abs(evals[0]) <= tol * scale:
        return FourPointClass("Boundary", ev)
    if evals[0] > 0:
        return FourPointClass("E4", ev)
    v = evecs[:, 0]
    # orthonormal basis of the plane orthogonal to v
    basis = np.linalg.svd(v[None, :])[2][1:]
    verts = np.vstack([np.zeros(3), np.eye(3)])
    pts = verts @ basis.T
    picture, inner = projection_picture(pts)
    return FourPointClass(PICTURE_CLASS[picture], ev, picture, inner)


def calibrate_pictures(rng, n: int = 2000, tol: float = 1e-9):
    """Count projection pictures over intrinsic spherical and hyperbolic samples.

    Returns ``{"sphere": {...}, "hyperbolic": {...}}``; the hard-coded
    PICTURE_CLASS is correct iff spheres never show the picture assigned to
    N4 and hyperbolic samples never show the one assigned to P4.
    """
    from .samples import hyperbolic_quadruple, sphere_quadruple

    out = {}
    for name, sampler in (("sphere", sphere_quadruple), ("hyperbolic", hyperbolic_quadruple)):
        counts = {"inside": 0, "convex": 0, "definite": 0, "boundary": 0}
        for _ in range(n):
            c = classify_four_point(sampler(rng), tol)
            if c.label == "Boundary":
                counts["boundary"] += 1
            elif c.picture is None:
                counts["definite"] += 1
            else:
                counts[c.picture] += 1
        out[name] = counts
    return out


# -- thin triangles -----------------------------------------------------------


@dataclass(frozen=True)
class ThinVerdict:
    passed: bool
    worst_violation: float
    witness: Optional[tuple] = None

    def to_dict(self):
        return {"pass": self.passed, "worst_violation": self.worst_violation, "witness": self.witness}


def thin_triangle_test(a: float, b: float, c: float, oracle: Callable, resolution: int = 16,
                       cfg: ModelConfig = ModelConfig()) -> ThinVerdict:
    """Sample the natural map from the model triangle and test that it is short.

    The triangle has vertices x1, x2, x3 with ``a = |x1 x2|``, ``b = |x2 x3|``,
    ``c = |x3 x1|``.  Side 0 runs x1 -> x2, side 1 x2 -> x3, side 2 x3 -> x1;
    ``oracle((i, s), (j, t))`` returns the distance between the point at arc
    length ``s`` on side ``i`` and the point at arc length ``t`` on side ``j``.
    """
    tri = model_triangle((a, c, b), cfg)
    if tri is None:
        raise ValueError("model triangle undefined")
    plane = tri.plane
    ends = [(tri.p, tri.q), (tri.q, tri.r), (tri.r, tri.p)]
    lengths = (a, b, c)
    scale = max(1.0, a, b, c)

    def model_point(side, s):
        u, v = ends[side]
        return plane.interpolate(u, v, s)

    # vertex bookkeeping: each vertex has two parameterizations
    vertex_params = {0: [(0, 0.0), (2, c)], 1: [(0, a), (1, 0.0)], 2: [(1, b), (2, 0.0)]}
    verts = (tri.p, tri.q, tri.r)
    for i in range(3):
        for j in range(3):
            for u in vertex_params[i]:
                for w in vertex_params[j]:
                    if u[0] == w[0]:
                        continue
                    want = plane.distance(verts[i], verts[j])
                    got = oracle(u, w)
                    if abs(got - want) > max(cfg.tol, 1e-7) * scale:
                        raise ValueError(f"oracle inconsistent at vertices: d{u,w}={got}, expected {want}")

    grids = [[(side, lengths[side] * k / resolution) for k in range(resolution + 1)] for side in range(3)]
    worst, witness = -math.inf, None
    for si in range(3):
        for sj in range(si + 1, 3):
            for u in grids[si]:
                mu = model_point(*u)
                for w in grids[sj]:
                    excess = oracle(u, w) - plane.distance(mu, model_point(*w))
                    if excess > worst:
                        worst, witness = excess, (u, w)
    return ThinVerdict(worst <= cfg.tol * scale, float(worst), witness)
