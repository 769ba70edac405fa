"""SVG figures: planar billiard tables with trajectories, 4-point class scatter."""

from __future__ import annotations

import numpy as np


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "catkit"  # stable element ids across runs
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_table(table, trajectories, path, extent: float = 3.0):
    """Draw the walls of a planar table and the given trajectories."""
    from matplotlib.patches import Circle, Polygon

    from .bodies import Ball, HalfSpace

    if table.dim != 2:
        raise ValueError("only planar tables can be plotted")
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 5))
    L = 10.0 * extent
    for w in table.walls:
        if isinstance(w, Ball):
            ax.add_patch(Circle(w.center, w.radius, color="0.75"))
        elif isinstance(w, HalfSpace):
            p0 = w.c * w.n
            t = np.array([-w.n[1], w.n[0]])
            ax.add_patch(Polygon([p0 + L * t, p0 - L * t, p0 - L * t - L * w.n, p0 + L * t - L * w.n],
                                 color="0.75"))
    for tr in trajectories:
        pts = [tr.start] + [e.point for e in tr.events]
        if tr.termination == "escape":
            # unbounded runs: draw the last leg out of the frame
            pts.append(np.add(pts[-1], np.multiply(tr.end_direction, 4.0 * extent)))
        else:
            pts.append(tr.end_point)
        xy = np.array(pts, dtype=float)
        ax.plot(xy[:, 0], xy[:, 1], lw=0.8)
        ax.plot(*xy[0], "k.", ms=3)
    ax.set_xlim(-extent, extent)
    ax.set_ylim(-extent, extent)
    ax.set_aspect("equal")
    _save(fig, path)
    plt.close(fig)


def classical_mds(D: np.ndarray, k: int = 2) -> np.ndarray:
    n = len(D)
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D ** 2) @ J
    w, V = np.linalg.eigh(B)
    idx = np.argsort(w)[::-1][:k]
    return V[:, idx] * np.sqrt(np.maximum(w[idx], 0.0))


def plot_four_point(dists, labels, path):
    """Scatter of quadruples (as normalized 6-vectors of distances), colored by class."""
    plt = _figure()
    iu = np.triu_indices(4, 1)
    vecs = np.array([np.asarray(d)[iu] for d in dists], dtype=float)
    vecs /= np.maximum(np.linalg.norm(vecs, axis=1, keepdims=True), 1e-300)
    D = np.linalg.norm(vecs[:, None, :] - vecs[None, :, :], axis=2)
    xy = classical_mds(D) if len(vecs) > 1 else np.zeros((len(vecs), 2))
    fig, ax = plt.subplots(figsize=(5, 5))
    for cls in ("E4", "P4", "N4", "Boundary"):
        sel = [i for i, c in enumerate(labels) if c == cls]
        if sel:
            ax.scatter(xy[sel, 0], xy[sel, 1], s=6, label=cls)
    ax.legend()
    _save(fig, path)
    plt.close(fig)
