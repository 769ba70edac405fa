"""Billiards outside convex walls, collision bounds, and hard-ball gases."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bodies import Ball, ConvexBody, Cylinder, HalfSpace, body_from_dict, project_intersection
from .pastry import _ceil_pi_over

T_EPS = 1e-12  # hits this soon after an event are ignored
SIMULTANEOUS_TOL = 1e-12
GRAZE_TOL = 1e-9


@dataclass(frozen=True)
class BilliardTable:
    """Closure of E^m minus the union of the walls."""

    walls: tuple
    interior_point: Optional[tuple] = None

    def __post_init__(self):
        walls = tuple(self.walls)
        object.__setattr__(self, "walls", walls)
        if walls and any(w.dim != walls[0].dim for w in walls):
            raise ValueError("walls must share the dimension")

    @property
    def dim(self) -> Optional[int]:
        return self.walls[0].dim if self.walls else None

    def wall_containing(self, x, tol: float = 1e-12) -> Optional[int]:
        for k, w in enumerate(self.walls):
            if w.interior_contains(x, tol):
                return k
        return None

    def to_dict(self):
        out = {"walls": [w.to_dict() for w in self.walls]}
        if self.interior_point is not None:
            out["interior_point"] = list(self.interior_point)
        return out

    @classmethod
    def from_dict(cls, obj) -> "BilliardTable":
        ip = obj.get("interior_point")
        return cls(tuple(body_from_dict(w) for w in obj["walls"]),
                   None if ip is None else tuple(map(float, ip)))


def wedge_table(alpha: float) -> BilliardTable:
    """Planar wedge {0 <= angle <= alpha}; walls are the two outer half-planes."""
    if not 0.0 < alpha < math.pi:
        raise ValueError("wedge angle must lie in (0, pi)")
    return BilliardTable((HalfSpace([0.0, 1.0], 0.0), HalfSpace([math.sin(alpha), -math.cos(alpha)], 0.0)))


@dataclass(frozen=True)
class Event:
    time: float
    wall: int
    point: tuple
    direction: tuple  # outgoing

    def to_dict(self):
        return {"time": self.time, "wall": self.wall, "point": list(self.point),
                "direction": list(self.direction)}


@dataclass
class Trajectory:
    start: tuple
    direction: tuple
    events: list = field(default_factory=list)
    termination: str = "max events"
    end_time: float = 0.0
    end_point: tuple = ()
    end_direction: tuple = ()

    @property
    def count(self) -> int:
        return len(self.events)

    def to_dict(self):
        return {"start": list(self.start), "direction": list(self.direction),
                "events": [e.to_dict() for e in self.events], "termination": self.termination,
                "end_time": self.end_time, "end_point": list(self.end_point),
                "end_direction": list(self.end_direction)}


def reflect(d: np.ndarray, n: np.ndarray) -> np.ndarray:
    return d - 2.0 * float(d @ n) * n


def simulate(table: BilliardTable, start, direction, max_events: int = 10000,
             horizon: float = math.inf) -> Trajectory:
    """Event-driven unit-speed billiard flow.

    Terminates with "max events", "horizon", "escape" (no wall ahead) or
    "degenerate hit" (two walls at once, or a grazing hit).
    """
    x = np.array(start, dtype=float)
    d = np.array(direction, dtype=float)
    if abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    k = table.wall_containing(x)
    if k is not None:
        raise ValueError(f"start point lies inside wall {k}")
    traj = Trajectory(tuple(x), tuple(d))
    t = 0.0
    last = None
    while True:
        hits = []
        for k, w in enumerate(table.walls):
            h = w.hit_time(x, d, T_EPS if k == last else 0.0)
            if h is not None:
                hits.append((h, k))
        if not hits:
            # nothing ahead; still advance to a finite horizon so the end
            # state can be replayed backwards
            traj.termination = "escape"
            if horizon != math.inf:
                x = x + (horizon - t) * d
                t = horizon
            break
        hits.sort()
        h, k = hits[0]
        if t + h > horizon:
            x = x + (horizon - t) * d
            t = horizon
            traj.termination = "horizon"
            break
        if len(traj.events) >= max_events:
            traj.termination = "max events"
            break
        x = x + h * d
        t += h
        n = table.walls[k].normal(x)
        if len(hits) > 1 and hits[1][0] - h <= SIMULTANEOUS_TOL or abs(float(d @ n)) < GRAZE_TOL:
            traj.termination = "degenerate hit"
            break
        d = reflect(d, n)
        traj.events.append(Event(t, k, tuple(x), tuple(d)))
        last = k
    traj.end_time, traj.end_point, traj.end_direction = t, tuple(x), tuple(d)
    return traj


def reverse(table: BilliardTable, traj: Trajectory, max_events: int = 10000) -> Trajectory:
    """Run the trajectory backwards from its end point for the same time."""
    return simulate(table, traj.end_point, tuple(-np.asarray(traj.end_direction)), max_events, traj.end_time)


# -- collision bound and corner widths -------------------------------------

def collision_bound(n: int, eps: float) -> int:
    """(ceil(pi/eps) + 1)^(n^2), exactly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (_ceil_pi_over(eps) + 1) ** (n * n)


@dataclass(frozen=True)
class CornerWidthEstimate:
    eps: float
    method: str

    def __post_init__(self):
        if not 0.0 < self.eps <= math.pi:
            raise ValueError("corner width must lie in (0, pi]")
        if self.method not in ("compact-formula", "symmetric-argument", "sampled"):
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self):
        return {"eps": self.eps, "method": self.method}


def corner_width_compact(r1: float, r2: float) -> CornerWidthEstimate:
    """Walls containing B(0, r1) and contained in B(0, r2) have 2 arcsin(r1/r2)-wide corners."""
    if not 0.0 < r1 < r2:
        raise ValueError("need 0 < r1 < r2")
    return CornerWidthEstimate(2.0 * math.asin(r1 / r2), "compact-formula")


def cone_aperture(normals) -> float:
    """Aperture of the widest round cone inside {v : <n_i, v> <= 0 for all i}.

    The half-angle beta satisfies sin(beta) = distance from 0 to the convex
    hull of the unit normals.
    """
    import cvxpy as cp

    Nm = np.asarray(normals, dtype=float)
    Nm = Nm / np.linalg.norm(Nm, axis=1, keepdims=True)
    if len(Nm) == 1:
        return math.pi
    lam = cp.Variable(len(Nm), nonneg=True)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(Nm.T @ lam)), [cp.sum(lam) == 1])
    prob.solve(solver=cp.CLARABEL)
    dist = math.sqrt(max(float(prob.value), 0.0))
    return 2.0 * math.asin(min(dist, 1.0))


def corner_width_sampled(walls: Sequence[ConvexBody], rng, samples: int = 200, scale: float = 3.0,
                         active_tol: float = 1e-7) -> CornerWidthEstimate:
    """Sampled lower estimate of the corner width of all wall intersections.

    Random points are projected onto each intersection; at the projection
    the active walls' normals give the widest tangent cone.  This is
    evidence, not a certificate.
    """
    walls = list(walls)
    dim = walls[0].dim
    eps = math.pi
    for r in range(2, len(walls) + 1):
        for F in itertools.combinations(range(len(walls)), r):
            group = [walls[i] for i in F]
            for _ in range(samples):
                p = project_intersection(group, rng.normal(size=dim) * scale)
                active = [w for w in group if w.distance(p) <= active_tol and not w.interior_contains(p, active_tol)]
                if len(active) >= 2:
                    eps = min(eps, cone_aperture([w.normal(p) for w in active]))
    return CornerWidthEstimate(eps, "sampled")


# -- wedge unfolding ---------------------------------------------------------

def unfolding_count(alpha: float, start, direction) -> int:
    """Number of wedge copies a straight ray crosses when the wedge is unfolded."""
    s = np.asarray(start, dtype=float)
    d = np.asarray(direction, dtype=float)
    th0 = math.atan2(s[1], s[0])
    sweep = math.atan2(s[0] * d[1] - s[1] * d[0], float(s @ d))
    th1 = th0 + sweep
    if sweep > 0:
        return max(0, math.ceil(th1 / alpha - 1e-12) - 1)
    return max(0, -math.floor(th1 / alpha + 1e-12))


class WedgeError(ValueError):
    pass


def wedge_reflection_count(alpha: float, start, direction):
    """(simulated count, unfolding count, ceil(pi/alpha)); raises on degenerate rays."""
    table = wedge_table(alpha)
    s = np.asarray(start, dtype=float)
    th = math.atan2(s[1], s[0])
    if not (np.linalg.norm(s) > 0 and 0.0 < th < alpha):
        raise WedgeError("start must lie inside the wedge")
    traj = simulate(table, start, direction, max_events=10 * _ceil_pi_over(alpha) + 10)
    if traj.termination != "escape":
        raise WedgeError(f"ray terminated with {traj.termination}")
    return traj.count, unfolding_count(alpha, start, direction), _ceil_pi_over(alpha)


# -- hard balls -----------------------------------------------------------------

@dataclass
class HardBallSystem:
    radii: np.ndarray
    masses: np.ndarray
    positions: np.ndarray  # n x 3
    velocities: np.ndarray  # n x 3

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float).reshape(len(self.radii), -1)
        self.velocities = np.asarray(self.velocities, dtype=float).reshape(len(self.radii), -1)
        if np.any(self.radii <= 0) or np.any(self.masses <= 0):
            raise ValueError("radii and masses must be positive")
        for i, j in self.pairs():
            if np.linalg.norm(self.positions[i] - self.positions[j]) < self.radii[i] + self.radii[j] - 1e-12:
                raise ValueError(f"balls {i} and {j} overlap")

    @property
    def n(self) -> int:
        return len(self.radii)

    def pairs(self):
        return list(itertools.combinations(range(self.n), 2))

    def energy(self) -> float:
        return 0.5 * float(np.sum(self.masses[:, None] * self.velocities ** 2))

    def momentum(self) -> np.ndarray:
        return (self.masses[:, None] * self.velocities).sum(axis=0)

    def to_dict(self):
        return {"radii": self.radii.tolist(), "masses": self.masses.tolist(),
                "positions": self.positions.tolist(), "velocities": self.velocities.tolist()}

    @classmethod
    def from_dict(cls, obj) -> "HardBallSystem":
        return cls(obj["radii"], obj["masses"], obj["positions"], obj["velocities"])


@dataclass(frozen=True)
class ConfigurationBilliard:
    table: BilliardTable
    start: tuple
    direction: tuple
    speed: float  # billiard arc length per unit of physical time
    pairs: tuple  # wall index -> ball pair

    def to_dict(self):
        return {"table": self.table.to_dict(), "start": list(self.start),
                "direction": list(self.direction), "speed": self.speed,
                "pairs": [list(p) for p in self.pairs]}


def hard_ball_to_billiard(sys: HardBallSystem) -> ConfigurationBilliard:
    """Configuration-space billiard of the gas in mass-rescaled coordinates."""
    block = sys.positions.shape[1]
    root = np.sqrt(sys.masses)[:, None]
    pairs = tuple(sys.pairs())
    walls = tuple(Cylinder(sys.n, i, j, sys.radii[i] + sys.radii[j], sys.masses, block) for i, j in pairs)
    y = (root * sys.positions).ravel()
    w = (root * sys.velocities).ravel()
    speed = float(np.linalg.norm(w))
    d = w / speed if speed > 0 else w
    return ConfigurationBilliard(BilliardTable(walls), tuple(y), tuple(d), speed, pairs)


@dataclass(frozen=True)
class BallEvent:
    time: float
    pair: tuple
    velocities: tuple  # post-collision, one tuple per ball

    def to_dict(self):
        return {"time": self.time, "pair": list(self.pair), "velocities": [list(v) for v in self.velocities]}


@dataclass
class HardBallRun:
    events: list
    termination: str
    final: HardBallSystem

    def to_dict(self):
        return {"events": [e.to_dict() for e in self.events], "termination": self.termination,
                "final": self.final.to_dict()}


class CrossCheckError(AssertionError):
    pass


def _pair_hit(dx, dv, R) -> Optional[float]:
    # approaching pairs only; same stable root as the wall hits
    a, b, c = float(dv @ dv), float(dx @ dv), float(dx @ dx) - R * R
    if a <= 0.0 or b >= 0.0:
        return None
    disc = b * b - a * c
    if disc <= 0.0:
        return None
    return c / (-b + math.sqrt(disc))


def resolve_collision(m1, m2, v1, v2, normal):
    """Elastic collision; the impulse acts along the unit centre line ``normal``."""
    J = 2.0 * m1 * m2 / (m1 + m2) * float((v1 - v2) @ normal)
    return v1 - (J / m1) * normal, v2 + (J / m2) * normal


def simulate_hard_balls_direct(sys: HardBallSystem, horizon: float = math.inf,
                               max_events: int = 10000) -> HardBallRun:
    pos = sys.positions.copy()
    vel = sys.velocities.copy()
    t = 0.0
    events = []
    last = None
    termination = "max events"
    while True:
        hits = []
        for i, j in sys.pairs():
            h = _pair_hit(pos[i] - pos[j], vel[i] - vel[j], sys.radii[i] + sys.radii[j])
            if h is not None and (h > T_EPS or (i, j) != last):
                hits.append((h, (i, j)))
        if not hits:
            termination = "escape"
            h = 0.0 if horizon == math.inf else horizon - t
            pos += h * vel
            t += h
            break
        hits.sort()
        h, (i, j) = hits[0]
        if t + h > horizon:
            pos += (horizon - t) * vel
            t = horizon
            termination = "horizon"
            break
        if len(events) >= max_events:
            break
        pos += h * vel
        t += h
        if len(hits) > 1 and hits[1][0] - h <= SIMULTANEOUS_TOL:
            termination = "degenerate hit"
            break
        nrm = pos[i] - pos[j]
        nrm /= np.linalg.norm(nrm)
        vel[i], vel[j] = resolve_collision(sys.masses[i], sys.masses[j], vel[i], vel[j], nrm)
        events.append(BallEvent(t, (i, j), tuple(tuple(v) for v in vel)))
        last = (i, j)
    final = HardBallSystem(sys.radii, sys.masses, pos, vel)
    return HardBallRun(events, termination, final)


def billiard_events_as_balls(cb: ConfigurationBilliard, traj: Trajectory, masses, block: int = 3):
    """Translate configuration-space events back to physical times and velocities."""
    root = np.sqrt(np.asarray(masses, dtype=float))[:, None]
    out = []
    for e in traj.events:
        v = (np.asarray(e.direction) * cb.speed).reshape(len(root), block) / root
        out.append(BallEvent(e.time / cb.speed, cb.pairs[e.wall], tuple(tuple(r) for r in v)))
    return out


def simulate_hard_balls(sys: HardBallSystem, horizon: float = math.inf, max_events: int = 10000,
                        check: bool = True, tol: float = 1e-8) -> HardBallRun:
    """Direct event-driven gas simulation.

    With ``check`` the run is replayed as a configuration-space billiard
    and the two event lists must agree pair for pair, with times and
    post-collision velocities within ``tol``.
    """
    run = simulate_hard_balls_direct(sys, horizon, max_events)
    if check:
        cb = hard_ball_to_billiard(sys)
        if cb.speed == 0.0 or not cb.pairs:
            if run.events:
                raise CrossCheckError("events in a system that cannot collide")
            return run
        bhor = horizon * cb.speed if horizon != math.inf else math.inf
        traj = simulate(cb.table, cb.start, cb.direction, max_events, bhor)
        other = billiard_events_as_balls(cb, traj, sys.masses, sys.positions.shape[1])
        compare_ball_events(run.events, other, tol)
        if (run.termination == "degenerate hit") != (traj.termination == "degenerate hit"):
            raise CrossCheckError(f"termination differs: {run.termination} vs {traj.termination}")
    return run


def compare_ball_events(a, b, tol: float = 1e-8) -> float:
    """Largest time mismatch between two event lists; raises if they disagree."""
    if len(a) != len(b):
        raise CrossCheckError(f"event counts differ: {len(a)} vs {len(b)}")
    worst = 0.0
    for k, (e, f) in enumerate(zip(a, b)):
        if e.pair != f.pair:
            raise CrossCheckError(f"event {k}: pair {e.pair} vs {f.pair}")
        dt = abs(e.time - f.time)
        dv = float(np.max(np.abs(np.asarray(e.velocities) - np.asarray(f.velocities))))
        scale = max(1.0, abs(e.time))
        if dt > tol * scale or dv > tol * max(1.0, float(np.max(np.abs(e.velocities)))):
            raise CrossCheckError(f"event {k}: time mismatch {dt:g}, velocity mismatch {dv:g}")
        worst = max(worst, dt)
    return worst


# -- seeded instance generators ---------------------------------------------

def random_ball_table(rng, n_walls: int, dim: int = 2, r1: float = 0.5, r2: float = 1.0) -> BilliardTable:
    """Ball walls that all contain B(0, r1) and lie inside B(0, r2)."""
    walls = []
    for _ in range(n_walls):
        rho = rng.uniform(r1, r2)
        # need |c| + r1 <= rho and |c| + rho <= r2
        cmax = min(rho - r1, r2 - rho)
        u = rng.normal(size=dim)
        c = u / np.linalg.norm(u) * rng.uniform(0.0, cmax)
        walls.append(Ball(c, rho))
    return BilliardTable(tuple(walls), tuple([0.0] * dim))


def random_shot(rng, dim: int, radius: float = 3.0, spread: float = 0.6):
    """Start on a sphere of the given radius, aimed roughly at the origin."""
    u = rng.normal(size=dim)
    s = u / np.linalg.norm(u) * radius
    d = -s / radius + spread * rng.normal(size=dim)
    return s, d / np.linalg.norm(d)


def random_hard_balls(rng, n: int, identical: bool = False, box: float = 2.0) -> HardBallSystem:
    if identical:
        radii, masses = np.full(n, 0.4), np.ones(n)
    else:
        radii, masses = rng.uniform(0.2, 0.6, n), rng.uniform(0.5, 2.0, n)
    pos = []
    while len(pos) < n:
        p = rng.uniform(-box, box, 3)
        if all(np.linalg.norm(p - q) > radii[len(pos)] + radii[k] + 1e-3 for k, q in enumerate(pos)):
            pos.append(p)
    pos = np.array(pos)
    vel = -0.5 * pos + rng.normal(size=(n, 3)) * 0.5
    return HardBallSystem(radii, masses, pos, vel)


def notch_shots(rng, table: BilliardTable, per_corner: int = 5, jitter: float = 0.05):
    """Shots aimed at the crossing points of two planar ball walls.

    Near such a crossing the table is a wedge narrower than pi, which is
    where multiple reflections happen.
    """
    walls = [w for w in table.walls if isinstance(w, Ball) and w.dim == 2]
    shots = []
    for a, b in itertools.combinations(walls, 2):
        dc = b.center - a.center
        dist = float(np.linalg.norm(dc))
        if dist == 0.0 or dist >= a.radius + b.radius or dist <= abs(a.radius - b.radius):
            continue
        along = (a.radius ** 2 - b.radius ** 2 + dist ** 2) / (2 * dist)
        h = math.sqrt(max(a.radius ** 2 - along ** 2, 0.0))
        mid = a.center + along * dc / dist
        perp = np.array([-dc[1], dc[0]]) / dist
        for q in (mid + h * perp, mid - h * perp):
            if table.wall_containing(q, 1e-9) is not None:
                continue
            for _ in range(per_corner):
                s = q + rng.normal(size=2) * jitter
                if table.wall_containing(s, 1e-9) is not None:
                    continue
                d = q - s + rng.normal(size=2) * (jitter / 5)
                shots.append((s, d / np.linalg.norm(d)))
    return shots
