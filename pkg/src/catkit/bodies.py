"""Closed convex bodies in E^m: membership, nearest-point maps, ray hits.

The same objects serve as the houses of a puff pastry and as billiard
walls.  A billiard trajectory lives outside every wall, so ``normal``
points out of the body and ``hit_time`` looks for the first time a ray
started outside enters the body.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

DYKSTRA_MAX_ITER = 20000
PARALLEL_TOL = 1e-14


def _vec(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise ValueError("expected a finite 1-d vector")
    return a


def _entry_root(a: float, b: float, c: float, t_min: float) -> Optional[float]:
    """Smallest root of a t^2 + 2 b t + c = 0 for a ray entering from outside.

    Uses the citardauq form for the small root.  Only approaching rays
    (b < 0) can enter; tangent rays (zero discriminant) are treated as misses.
    """
    if a <= 0.0 or b >= 0.0:
        return None
    disc = b * b - a * c
    if disc <= 0.0:
        return None
    q = -b + math.sqrt(disc)
    t = c / q
    return t if t > t_min else None


class ConvexBody:
    """Common interface; subclasses hold the concrete representation."""

    dim: int
    smooth = True

    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def interior_contains(self, x, tol: float = 1e-12) -> bool:
        """True if x lies in the body at depth more than tol."""
        raise NotImplementedError

    def distance(self, x) -> float:
        x = _vec(x)
        return float(np.linalg.norm(x - self.project(x)))

    def support(self, u) -> float:
        """Support function sup <u, a> over the body (may be inf)."""
        raise NotImplementedError

    def normal(self, x) -> np.ndarray:
        """Unit normal at a boundary point, pointing out of the body."""
        raise NotImplementedError

    def hit_time(self, x, d, t_min: float = 0.0) -> Optional[float]:
        raise NotImplementedError

    def cvx_constraints(self, var):
        """Constraints for a cvxpy variable ranging over the body."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class HalfSpace(ConvexBody):
    """{x : <normal, x> <= offset}; the normal is rescaled to unit length."""

    def __init__(self, normal: Sequence[float], offset: float):
        n = _vec(normal)
        s = float(np.linalg.norm(n))
        if s == 0.0:
            raise ValueError("zero normal")
        self.n = n / s
        self.c = float(offset) / s
        self.dim = len(n)

    def __repr__(self):
        return f"HalfSpace({self.n.tolist()}, {self.c})"

    def level(self, x) -> float:
        return float(self.n @ _vec(x)) - self.c

    def contains(self, x, tol=1e-9):
        return self.level(x) <= tol

    def interior_contains(self, x, tol=1e-12):
        return self.level(x) < -tol

    def project(self, x):
        x = _vec(x)
        e = self.level(x)
        return x - e * self.n if e > 0.0 else x.copy()

    def support(self, u):
        u = _vec(u)
        lam = float(u @ self.n)
        if lam >= 0.0 and np.allclose(u, lam * self.n, atol=1e-12):
            return lam * self.c
        return math.inf

    def normal(self, x=None):
        return self.n.copy()

    def hit_time(self, x, d, t_min=0.0):
        rate = float(self.n @ _vec(d))
        # reflecting off a wall at an exact multiple of its angle leaves
        # rounding noise here; such rays run parallel to the face
        if rate >= -PARALLEL_TOL:
            return None
        t = -self.level(x) / rate
        return t if t > t_min else None

    def cvx_constraints(self, var):
        return [self.n @ var <= self.c]

    def to_dict(self):
        return {"halfspace": {"normal": self.n.tolist(), "offset": self.c}}


class Ball(ConvexBody):
    def __init__(self, center: Sequence[float], radius: float):
        self.center = _vec(center)
        self.radius = float(radius)
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        self.dim = len(self.center)

    def __repr__(self):
        return f"Ball({self.center.tolist()}, {self.radius})"

    def contains(self, x, tol=1e-9):
        return float(np.linalg.norm(_vec(x) - self.center)) <= self.radius + tol

    def interior_contains(self, x, tol=1e-12):
        return float(np.linalg.norm(_vec(x) - self.center)) < self.radius - tol

    def project(self, x):
        x = _vec(x)
        v = x - self.center
        r = float(np.linalg.norm(v))
        return x.copy() if r <= self.radius else self.center + v * (self.radius / r)

    def support(self, u):
        u = _vec(u)
        return float(u @ self.center) + self.radius * float(np.linalg.norm(u))

    def normal(self, x):
        v = _vec(x) - self.center
        return v / np.linalg.norm(v)

    def hit_time(self, x, d, t_min=0.0):
        v = _vec(x) - self.center
        d = _vec(d)
        return _entry_root(float(d @ d), float(v @ d), float(v @ v) - self.radius ** 2, t_min)

    def cvx_constraints(self, var):
        import cvxpy as cp

        return [cp.norm(var - self.center, 2) <= self.radius]

    def to_dict(self):
        return {"ball": {"center": self.center.tolist(), "radius": self.radius}}


class Polytope(ConvexBody):
    """Intersection of finitely many half-spaces; projection by Dykstra's method."""

    smooth = False

    def __init__(self, halfspaces: Sequence[HalfSpace]):
        self.halfspaces = list(halfspaces)
        if not self.halfspaces:
            raise ValueError("empty half-space list")
        self.dim = self.halfspaces[0].dim
        if any(h.dim != self.dim for h in self.halfspaces):
            raise ValueError("dimension mismatch")
        self.A = np.array([h.n for h in self.halfspaces])
        self.b = np.array([h.c for h in self.halfspaces])

    def __repr__(self):
        return f"Polytope({self.halfspaces!r})"

    def contains(self, x, tol=1e-9):
        return bool(np.all(self.A @ _vec(x) - self.b <= tol))

    def interior_contains(self, x, tol=1e-12):
        return bool(np.all(self.A @ _vec(x) - self.b < -tol))

    def project(self, x, tol: float = 1e-13):
        x = _vec(x)
        if self.contains(x, 0.0):
            return x.copy()
        y = x.copy()
        incr = np.zeros((len(self.halfspaces), self.dim))
        for _ in range(DYKSTRA_MAX_ITER):
            prev = y.copy()
            for k, h in enumerate(self.halfspaces):
                z = y + incr[k]
                y = h.project(z)
                incr[k] = z - y
            if np.linalg.norm(y - prev) <= tol * (1.0 + np.linalg.norm(y)):
                break
        return y

    def support(self, u):
        from scipy.optimize import linprog

        res = linprog(-_vec(u), A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * self.dim)
        if res.status == 3:
            return math.inf
        if res.status != 0:
            raise ValueError("polytope support LP failed: " + res.message)
        return float(-res.fun)

    def cvx_constraints(self, var):
        return [self.A @ var <= self.b]

    def to_dict(self):
        return {"polytope": [h.to_dict()["halfspace"] for h in self.halfspaces]}


class Cylinder(ConvexBody):
    """Collision cylinder of two balls in mass-rescaled configuration space.

    In coordinates y_k = sqrt(M_k) a_k (blocks of size ``block``) the set is
    {y : |y_i/sqrt(M_i) - y_j/sqrt(M_j)| <= radius}.  With unit masses this
    is the plain cylinder {|a_i - a_j| <= R_i + R_j}.
    """

    def __init__(self, n: int, i: int, j: int, radius: float, masses=None, block: int = 3):
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise ValueError("bad ball indices")
        if not radius > 0.0:
            raise ValueError("radius must be positive")
        self.n, self.i, self.j, self.block = n, i, j, block
        self.radius = float(radius)
        self.masses = np.ones(n) if masses is None else np.asarray(masses, dtype=float)
        self.dim = n * block
        self._wi = 1.0 / math.sqrt(self.masses[i])
        self._wj = 1.0 / math.sqrt(self.masses[j])
        self._s = self._wi ** 2 + self._wj ** 2

    def __repr__(self):
        return f"Cylinder(n={self.n}, i={self.i}, j={self.j}, radius={self.radius})"

    def _blk(self, k):
        return slice(k * self.block, (k + 1) * self.block)

    def gap(self, y) -> np.ndarray:
        """Separation vector a_i - a_j of the two balls."""
        y = _vec(y)
        return self._wi * y[self._blk(self.i)] - self._wj * y[self._blk(self.j)]

    def _lift(self, g) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self._blk(self.i)] = self._wi * g
        out[self._blk(self.j)] = -self._wj * g
        return out

    def contains(self, x, tol=1e-9):
        return float(np.linalg.norm(self.gap(x))) <= self.radius + tol

    def interior_contains(self, x, tol=1e-12):
        return float(np.linalg.norm(self.gap(x))) < self.radius - tol

    def project(self, x):
        x = _vec(x)
        g = self.gap(x)
        r = float(np.linalg.norm(g))
        if r <= self.radius:
            return x.copy()
        return x - self._lift(g * ((r - self.radius) / (self._s * r)))

    def support(self, u):
        # unbounded along the kernel of the gap map unless u lies in its range
        u = _vec(u)
        gi, gj = u[self._blk(self.i)] / self._wi, -u[self._blk(self.j)] / self._wj
        rest = np.delete(u, np.r_[self._blk(self.i), self._blk(self.j)])
        if np.allclose(gi, gj, atol=1e-12) and np.allclose(rest, 0.0, atol=1e-12):
            return self.radius * float(np.linalg.norm(gi))
        return math.inf

    def normal(self, x):
        v = self._lift(self.gap(x))
        return v / np.linalg.norm(v)

    def hit_time(self, x, d, t_min=0.0):
        g, h = self.gap(x), self.gap(d)
        return _entry_root(float(h @ h), float(g @ h), float(g @ g) - self.radius ** 2, t_min)

    def cvx_constraints(self, var):
        import cvxpy as cp

        gi = var[self._blk(self.i)] * self._wi - var[self._blk(self.j)] * self._wj
        return [cp.norm(gi, 2) <= self.radius]

    def to_dict(self):
        out = {"type": "cylinder", "n": self.n, "i": self.i, "j": self.j, "radius": self.radius}
        if not np.all(self.masses == 1.0):
            out["masses"] = self.masses.tolist()
        return out


def project_intersection(bodies: Sequence[ConvexBody], x, tol: float = 1e-12,
                         max_iter: int = DYKSTRA_MAX_ITER) -> np.ndarray:
    """Nearest point of the intersection of the bodies, by Dykstra's method."""
    y = _vec(x).copy()
    incr = np.zeros((len(bodies), len(y)))
    for _ in range(max_iter):
        prev = y.copy()
        for k, b in enumerate(bodies):
            z = y + incr[k]
            y = b.project(z)
            incr[k] = z - y
        if np.linalg.norm(y - prev) <= tol * (1.0 + np.linalg.norm(y)):
            break
    return y


def body_from_dict(obj) -> ConvexBody:
    """Decode the tagged-union body schema."""
    if not isinstance(obj, dict):
        raise ValueError("body must be a JSON object")
    if obj.get("type") == "cylinder":
        n = int(obj.get("n", max(obj["i"], obj["j"]) + 1))
        return Cylinder(n, int(obj["i"]), int(obj["j"]), float(obj["radius"]), obj.get("masses"))
    if len(obj) != 1:
        raise ValueError(f"unknown body {obj!r}")
    (tag, val), = obj.items()
    if tag == "halfspace":
        return HalfSpace(val["normal"], val["offset"])
    if tag == "ball":
        return Ball(val["center"], val["radius"])
    if tag == "polytope":
        return Polytope([HalfSpace(h["normal"], h["offset"]) for h in val])
    raise ValueError(f"unknown body tag {tag!r}")
