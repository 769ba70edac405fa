"""Seeded generators of finite metric data used by the suites."""

from __future__ import annotations

import math

import numpy as np

from .metric import FiniteMetricSpace


def euclidean_quadruple(rng, dim: int = 3) -> np.ndarray:
    pts = rng.standard_normal((4, dim))
    return FiniteMetricSpace.from_points(pts).dist


def sphere_points(rng, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sphere_quadruple(rng) -> np.ndarray:
    pts = sphere_points(rng, 4)
    cross = np.linalg.norm(np.cross(pts[:, None, :], pts[None, :, :]), axis=-1)
    d = np.arctan2(cross, pts @ pts.T)
    np.fill_diagonal(d, 0.0)
    return d


def hyperbolic_points(rng, n: int, radius: float = 3.0) -> np.ndarray:
    # uniform in a hyperbolic disc: area element ~ sinh(r)
    u = rng.random(n)
    r = np.arccosh(1.0 + u * (math.cosh(radius) - 1.0))
    th = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.stack([np.cosh(r), np.sinh(r) * np.cos(th), np.sinh(r) * np.sin(th)], axis=1)


def hyperbolic_quadruple(rng, radius: float = 3.0) -> np.ndarray:
    pts = hyperbolic_points(rng, 4, radius)
    w = pts[:, None, :] - pts[None, :, :]
    q = np.maximum(-w[..., 0] ** 2 + w[..., 1] ** 2 + w[..., 2] ** 2, 0.0)
    return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)


def random_tree(rng, n_nodes: int = 20, low: float = 0.1, high: float = 1.0):
    """Random recursive tree; returns (parent list, edge weights)."""
    parents = [-1] + [int(rng.integers(0, i)) for i in range(1, n_nodes)]
    weights = [0.0] + list(rng.uniform(low, high, n_nodes - 1))
    return parents, weights


def tree_metric(parents, weights) -> np.ndarray:
    n = len(parents)
    depth = [0.0] * n
    anc = [[i] for i in range(n)]
    for i in range(1, n):
        depth[i] = depth[parents[i]] + weights[i]
        anc[i] = anc[parents[i]] + [i]
    d = np.zeros((n, n))
    for i in range(n):
        si = set(anc[i])
        for j in range(i + 1, n):
            lca = max((a for a in anc[j] if a in si), key=lambda a: depth[a])
            d[i, j] = d[j, i] = depth[i] + depth[j] - 2.0 * depth[lca]
    return d


def random_tree_metric(rng, n_nodes: int = 20) -> np.ndarray:
    return tree_metric(*random_tree(rng, n_nodes))


def product_metric(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """l2 product of two finite metrics, points indexed row-major."""
    a = d1[:, None, :, None] ** 2 + d2[None, :, None, :] ** 2
    n = d1.shape[0] * d2.shape[0]
    return np.sqrt(a.reshape(n, n))


def sub_quadruple(rng, d: np.ndarray) -> np.ndarray:
    idx = rng.choice(d.shape[0], size=4, replace=False)
    return d[np.ix_(idx, idx)]


def angle_triple(rng, high: float = math.pi / 2):
    """(|px|, |py|, |xy|) obeying the triangle inequality with perimeter < 2 pi.

    The sides at p are drawn from (0, high).  The spherical half of the
    angle-gap bound fails when a side at p comes close to pi, so the
    default keeps them at most pi/2.
    """
    while True:
        px, py = rng.uniform(0.0, high, 2)
        xy = rng.uniform(abs(px - py), px + py)
        if px > 0 and py > 0 and px + py + xy < 2.0 * math.pi:
            return float(px), float(py), float(xy)


def alexandrov_config(rng, kappa: int):
    """Random (px, py, pz, xy, xz, zy) with z strictly between x and y."""
    while True:
        xz, zy = rng.uniform(0.05, 1.5, 2)
        xy = xz + zy
        px = rng.uniform(0.05, 2.0)
        pz = rng.uniform(abs(px - xz), px + xz)
        py = rng.uniform(abs(pz - zy), pz + zy)
        if xy > px + py or min(pz, py) <= 1e-6:
            continue
        if kappa == 1 and max(pz + py + xy, px + pz + xz, px + py + xy) >= 2.0 * math.pi:
            continue
        return float(px), float(py), float(pz), float(xy), float(xz), float(zy)


def random_complex(rng, n_vertices: int = 6, n_faces: int = 4, max_size: int = 4):
    """Random simplicial complex from a few random maximal-face candidates."""
    from .complexes import SimplicialComplex

    faces = []
    for _ in range(n_faces):
        k = int(rng.integers(1, max_size + 1))
        faces.append(sorted(int(v) for v in rng.choice(n_vertices, size=min(k, n_vertices), replace=False)))
    return SimplicialComplex(faces, vertices=range(n_vertices))
