"""Simplicial and cubical complexes: flag condition, links, subdivision,
cubical analogs and the split complex of rooted phylogenetic trees."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Optional

import networkx as nx
import numpy as np


def _sort_key(v):
    if isinstance(v, (frozenset, set)):
        return (len(v), sorted(v, key=_sort_key))
    return (0, v) if isinstance(v, (int, np.integer)) else (1, str(v))


def _sorted(vs):
    try:
        return sorted(vs)
    except TypeError:
        return sorted(vs, key=_sort_key)


class SimplicialComplex:
    """Finite abstract simplicial complex stored by its maximal faces.

    ``simplices`` may be any generating family; its downward closure is the
    complex.  ``vertices`` may add isolated vertices.
    """

    def __init__(self, simplices: Iterable = (), vertices: Iterable = ()):
        gens = {frozenset(s) for s in simplices}
        gens.discard(frozenset())
        for v in vertices:
            gens.add(frozenset([v]))
        # keep only inclusion-maximal generators
        by_size = sorted(gens, key=len, reverse=True)
        maximal = []
        larger = []  # accepted faces strictly larger than the current size
        pending, size = [], None
        for s in by_size:
            if len(s) != size:
                larger.extend(pending)
                pending, size = [], len(s)
            if not any(s < m for m in larger):
                pending.append(s)
                maximal.append(s)
        self.maximal = tuple(sorted(maximal, key=lambda s: (len(s), _sorted(s) if s else [])))
        self.vertices = tuple(_sorted({v for m in maximal for v in m}))

    def __repr__(self):
        return f"SimplicialComplex(maximal={[_sorted(m) for m in self.maximal]})"

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and set(self.maximal) == set(other.maximal)

    def __hash__(self):
        return hash(frozenset(self.maximal))

    @cached_property
    def faces(self) -> frozenset:
        """All nonempty simplices."""
        out = set()
        for m in self.maximal:
            items = list(m)
            for k in range(1, len(items) + 1):
                out.update(frozenset(c) for c in itertools.combinations(items, k))
        return frozenset(out)

    def __contains__(self, simplex) -> bool:
        s = frozenset(simplex)
        return not s or s in self.faces

    @property
    def dim(self) -> int:
        return max((len(m) for m in self.maximal), default=0) - 1

    def f_vector(self):
        counts = {}
        for f in self.faces:
            counts[len(f) - 1] = counts.get(len(f) - 1, 0) + 1
        return [counts.get(k, 0) for k in range(self.dim + 1)]

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        for m in self.maximal:
            g.add_edges_from(itertools.combinations(m, 2))
        return g

    def is_valid(self) -> bool:
        """Downward closure and vertex bookkeeping hold."""
        faces = self.faces
        for f in faces:
            for v in f:
                if len(f) > 1 and f - {v} not in faces:
                    return False
        return {v for f in faces for v in f} == set(self.vertices)

    def to_dict(self):
        def enc(v):
            return _sorted(v) if isinstance(v, frozenset) else v

        return {"vertices": [enc(v) for v in self.vertices], "maximal": [[enc(v) for v in _sorted(m)] for m in self.maximal]}

    @classmethod
    def from_dict(cls, obj) -> "SimplicialComplex":
        def dec(v):
            return frozenset(dec(x) for x in v) if isinstance(v, list) else v

        return cls([[dec(v) for v in m] for m in obj.get("maximal", [])], [dec(v) for v in obj.get("vertices", [])])


def is_flag(S: SimplicialComplex):
    """Flag test; returns ``(True, None)`` or ``(False, minimal empty clique)``."""
    for clique in nx.find_cliques(S.graph):
        if clique not in S:
            for k in range(3, len(clique) + 1):
                for sub in itertools.combinations(_sorted(clique), k):
                    if sub not in S:
                        return False, tuple(sub)
    return True, None


def no_triangle_condition(S: SimplicialComplex):
    """Every 3-clique of the 1-skeleton spans a 2-simplex; returns ``(ok, witness)``."""
    g = S.graph
    for u, v in g.edges():
        for w in nx.common_neighbors(g, u, v):
            if (u, v, w) not in S:
                return False, tuple(_sorted((u, v, w)))
    return True, None


def link(S: SimplicialComplex, sigma) -> SimplicialComplex:
    """Faces disjoint from ``sigma`` whose union with it is a simplex."""
    s = frozenset(sigma)
    if not s or s not in S:
        raise ValueError(f"{_sorted(s)} is not a simplex of the complex")
    return SimplicialComplex(m - s for m in S.maximal if s <= m)


def no_triangle_in_all_links(S: SimplicialComplex):
    """No-triangle condition for S and for the link of every simplex.

    Returns ``(ok, witness)`` with witness ``(sigma, triangle)``; sigma is
    ``()`` for S itself.  Equivalent to flagness.
    """
    ok, tri = no_triangle_condition(S)
    if not ok:
        return False, ((), tri)
    for sigma in sorted(S.faces, key=lambda f: (len(f), _sorted(f))):
        ok, tri = no_triangle_condition(link(S, sigma))
        if not ok:
            return False, (tuple(_sorted(sigma)), tri)
    return True, None


def barycentric_subdivision(S: SimplicialComplex) -> SimplicialComplex:
    """Vertices are the simplices of ``S``; simplices are inclusion chains."""
    chains = []
    for m in S.maximal:
        for order in itertools.permutations(_sorted(m)):
            chains.append([frozenset(order[:k]) for k in range(1, len(order) + 1)])
    return SimplicialComplex(chains)


def is_isomorphic(A: SimplicialComplex, B: SimplicialComplex) -> Optional[dict]:
    """Backtracking search for a vertex bijection carrying faces to faces."""
    if A.f_vector() != B.f_vector() or len(A.vertices) != len(B.vertices):
        return None

    def signature(S, v):
        return tuple(sorted(len(f) for f in S.faces if v in f))

    sa = {v: signature(A, v) for v in A.vertices}
    sb = {v: signature(B, v) for v in B.vertices}
    order = sorted(A.vertices, key=lambda v: -A.graph.degree(v))
    fa = A.faces

    def rec(i, mapping, used):
        if i == len(order):
            return dict(mapping)
        v = order[i]
        for w in B.vertices:
            if w in used or sb[w] != sa[v]:
                continue
            mapping[v] = w
            ok = True
            for f in fa:
                if v in f and all(u in mapping for u in f):
                    if frozenset(mapping[u] for u in f) not in B:
                        ok = False
                        break
            if ok:
                used.add(w)
                res = rec(i + 1, mapping, used)
                if res is not None:
                    return res
                used.discard(w)
            del mapping[v]
        return None

    return rec(0, {}, set())


# -- all-right spherical metric -----------------------------------------------


@dataclass(frozen=True)
class GeodesicLoopWitness:
    """Three pairwise adjacent vertices spanning no 2-simplex in the link of ``base``.

    With the all-right metric the loop through them is a local geodesic of
    length ``3*pi/2 < 2*pi``.
    """

    base: tuple
    vertices: tuple
    length: float = 1.5 * math.pi

    def to_dict(self):
        return {"base": list(self.base), "vertices": list(self.vertices), "length": self.length}


@dataclass(frozen=True)
class Cat1Verdict:
    verdict: str  # CAT1, NotCAT1 or Undetermined
    witness: Optional[GeodesicLoopWitness] = None

    def to_dict(self):
        return {"verdict": self.verdict, "witness": self.witness.to_dict() if self.witness else None}


def short_loop_witness(S: SimplicialComplex) -> Optional[GeodesicLoopWitness]:
    """Empty triangle in ``S`` or in the link of one of its simplices."""
    ok, w = no_triangle_condition(S)
    if not ok:
        return GeodesicLoopWitness((), w)
    for sigma in sorted(S.faces, key=lambda f: (len(f), _sorted(f))):
        ok, w = no_triangle_condition(link(S, sigma))
        if not ok:
            return GeodesicLoopWitness(tuple(_sorted(sigma)), w)
    return None


def all_right_cat1_verdict(S: SimplicialComplex, edges_at_least_half_pi: bool = False) -> Cat1Verdict:
    """CAT(1) verdict for ``S`` with the all-right spherical metric.

    With ``edges_at_least_half_pi`` the simplices are only assumed to have
    sides of length at least pi/2; flag still certifies CAT(1), but a
    non-flag complex is then reported as Undetermined.
    """
    flag, _ = is_flag(S)
    if flag:
        return Cat1Verdict("CAT1")
    w = short_loop_witness(S)
    return Cat1Verdict("Undetermined" if edges_at_least_half_pi else "NotCAT1", w)


# -- cubical complexes ----------------------------------------------------------


class CubicalComplex:
    """Subcomplex of the unit cube in R^N.

    A face is a pair ``(free, fixed)`` of bitmasks: coordinates in ``free``
    range over [0, 1], every other coordinate ``i`` is fixed to bit ``i`` of
    ``fixed``.  ``coord_labels[i]`` names coordinate ``i``.
    """

    def __init__(self, N: int, faces: Iterable, coord_labels=None, close: bool = True):
        by_free = {}
        for free, fixed in faces:
            by_free.setdefault(free, set()).add(fixed & ~free)
        self._setup(N, by_free, coord_labels, close)

    @classmethod
    def from_free_index(cls, N: int, by_free: dict, coord_labels=None, close: bool = True) -> "CubicalComplex":
        """Build from ``{free mask: iterable of fixed masks}``."""
        obj = cls.__new__(cls)
        obj._setup(N, {free: {f & ~free for f in fs} for free, fs in by_free.items()}, coord_labels, close)
        return obj

    def _setup(self, N, by_free, coord_labels, close):
        self.N = N
        full = (1 << N) - 1
        for free, fs in by_free.items():
            if free & ~full or any(f & ~full for f in fs):
                raise ValueError("face outside the cube")
        if close:
            _close_by_free(by_free)
        self._by_free = {k: frozenset(v) for k, v in by_free.items() if v}
        self.coord_labels = tuple(coord_labels) if coord_labels is not None else tuple(range(N))

    @property
    def faces(self) -> frozenset:
        return frozenset((free, fixed) for free, fs in self._by_free.items() for fixed in fs)

    def __contains__(self, face):
        free, fixed = face
        return fixed & ~free in self._by_free.get(free, ())

    def __len__(self):
        return sum(len(v) for v in self._by_free.values())

    def vertices(self):
        return sorted(self._by_free.get(0, ()))

    def is_closed(self) -> bool:
        return all(f in self for face in self.faces for f in _cube_facets(*face))

    def f_vector(self):
        counts = {}
        for free, fs in self._by_free.items():
            k = bin(free).count("1")
            counts[k] = counts.get(k, 0) + len(fs)
        return [counts.get(k, 0) for k in range(max(counts, default=-1) + 1)]

    def vertex_link_masks(self) -> np.ndarray:
        """Links of all vertices at once.

        Entry ``v`` has bit ``free`` set iff a cube with free coordinates
        ``free`` contains vertex ``v``; bit 0 marks ``v`` itself.  Needs
        ``N <= 6`` so the 2**N possible free masks fit in 64 bits.
        """
        if self.N > 6:
            raise ValueError("mask form needs N <= 6")
        out = np.zeros(1 << self.N, dtype=np.uint64)
        for free, fs in self._by_free.items():
            # a vertex lies in (free, fixed) iff it agrees with fixed off the free coordinates
            verts = (np.fromiter(fs, dtype=np.int64)[:, None] | np.array(_submasks(free), dtype=np.int64)[None, :]).ravel()
            out[verts] |= np.uint64(1) << np.uint64(free)
        return out

    def to_dict(self):
        def enc(face):
            free, fixed = face
            return [None if free >> i & 1 else fixed >> i & 1 for i in range(self.N)]

        return {"N": self.N, "coord_labels": list(self.coord_labels), "faces": [enc(f) for f in sorted(self.faces)]}


@lru_cache(maxsize=None)
def _submasks(mask: int) -> tuple:
    out = [0]
    m = mask
    while m:
        bit = m & -m
        m ^= bit
        out += [x | bit for x in out]
    return tuple(out)


def _cube_facets(free, fixed):
    f = free
    while f:
        bit = f & -f
        f ^= bit
        yield free ^ bit, fixed
        yield free ^ bit, fixed | bit


def _close_by_free(by_free):
    for free in sorted(by_free, key=lambda f: -bin(f).count("1")):
        fs = by_free[free]
        f = free
        while f:
            bit = f & -f
            f ^= bit
            target = by_free.setdefault(free ^ bit, set())
            target.update(fs)
            target.update(x | bit for x in fs)


def cubical_analog(S: SimplicialComplex) -> CubicalComplex:
    """Mark, for each simplex, every cube face parallel to its coordinate plane."""
    labels = S.vertices
    N = len(labels)
    full = (1 << N) - 1
    index = {v: i for i, v in enumerate(labels)}
    marked = {}
    for sigma in S.faces:
        free = sum(1 << index[v] for v in sigma)
        marked[free] = _submasks(full & ~free)
    return CubicalComplex.from_free_index(N, marked, labels)


def complex_mask(S: SimplicialComplex) -> int:
    """Bitmask over coordinate subsets (vertex i of ``S`` is coordinate i), empty face included."""
    index = {v: i for i, v in enumerate(S.vertices)}
    out = 1
    for f in S.faces:
        out |= 1 << sum(1 << index[v] for v in f)
    return out


def cubical_vertex_link(Q: CubicalComplex, v) -> SimplicialComplex:
    """Simplicial link of a cube vertex: k-simplices are incident (k+1)-cubes.

    ``v`` is a 0/1 sequence of length N or an integer bitmask.
    """
    if not isinstance(v, (int, np.integer)):
        v = sum(int(b) << i for i, b in enumerate(v))
    if (0, v) not in Q:
        raise ValueError(f"vertex {v:b} is not in the cubical complex")
    simplices = []
    for free, fixeds in Q._by_free.items():
        if free and (v & ~free) in fixeds:
            simplices.append([Q.coord_labels[i] for i in range(Q.N) if free >> i & 1])
    return SimplicialComplex(simplices)


# -- rooted tree split complex -------------------------------------------------


def _binary_trees(n_leaves: int):
    """All unrooted binary trees on leaves 0..n_leaves-1 as edge lists."""
    # internal nodes are numbered from n_leaves upward
    start = [(0, n_leaves), (1, n_leaves), (2, n_leaves)]
    trees = [start]
    for leaf in range(3, n_leaves):
        nxt = []
        for edges in trees:
            new_node = n_leaves + leaf - 2
            for k, (a, b) in enumerate(edges):
                e = edges[:k] + edges[k + 1:] + [(a, new_node), (new_node, b), (leaf, new_node)]
                nxt.append(e)
        trees = nxt
    return trees


def _internal_splits(edges, n_leaves):
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    # hang the tree from leaf 0; the leaves below an internal edge form the split
    below = {}
    order, parent = [0], {0: None}
    for node in order:
        for nb in adj[node]:
            if nb != parent[node]:
                parent[nb] = node
                order.append(nb)
    for node in reversed(order):
        leaves = frozenset([node]) if node < n_leaves else frozenset()
        for nb in adj[node]:
            if nb != parent[node]:
                leaves |= below[nb]
        below[node] = leaves
    return [below[v] for v in order if v >= n_leaves and parent[v] is not None and parent[v] >= n_leaves]


def splits_compatible(a: frozenset, b: frozenset) -> bool:
    # both sides exclude the root label 0, so the complements always meet
    return a <= b or b <= a or not (a & b)


def bhv_link_complex(n: int):
    """Split complex of rooted trees with ``n`` labeled leaves.

    The root is treated as leaf label 0, so trees are unrooted binary trees on
    labels 0..n; a split is named by its side not containing 0.  Maximal
    simplices are the split sets of binary trees, so faces are exactly the
    jointly realizable split sets.  Returns ``(complex, is_flag result)``.
    """
    if not 3 <= n <= 7:
        raise ValueError("n must be between 3 and 7")
    trees = _binary_trees(n + 1)
    S = SimplicialComplex(_internal_splits(t, n + 1) for t in trees)
    return S, is_flag(S)


# -- enumeration of small complexes up to relabeling ---------------------------


def _perm_tables(n):
    perms = list(itertools.permutations(range(n)))
    size = 1 << n
    img = np.zeros((len(perms), size), dtype=np.uint64)
    for p, perm in enumerate(perms):
        for s in range(size):
            t = 0
            for i in range(n):
                if s >> i & 1:
                    t |= 1 << perm[i]
            img[p, s] = t
    nbytes = (size + 7) // 8
    bits = np.zeros((len(perms), nbytes * 8), dtype=np.uint64)
    bits[:, :size] = np.left_shift(np.uint64(1), img)
    bits = bits.reshape(len(perms), nbytes, 8)
    vals = np.arange(256)
    sel = ((vals[:, None] >> np.arange(8)[None, :]) & 1).astype(np.uint64)  # (256, 8)
    # T[p, b, v] = OR of image bits for the set bits of byte v at byte position b
    return np.einsum("pbj,vj->pbv", bits, sel), nbytes


def _canonical_masks(masks, tables, nbytes, chunk=4096):
    out = np.empty(len(masks), dtype=np.uint64)
    for lo in range(0, len(masks), chunk):
        m = masks[lo:lo + chunk]
        acc = np.zeros((tables.shape[0], len(m)), dtype=np.uint64)
        for b in range(nbytes):
            acc |= tables[:, b, ((m >> np.uint64(8 * b)) & np.uint64(255)).astype(np.intp)]
        out[lo:lo + chunk] = acc.min(axis=0)
    return out


def mask_to_complex(mask: int, n: int) -> SimplicialComplex:
    faces = [[i for i in range(n) if s >> i & 1] for s in range(1, 1 << n) if mask >> s & 1]
    return SimplicialComplex(faces)


def complex_classes(n: int):
    """One representative per isomorphism class of complexes on at most ``n`` vertices.

    Complexes are encoded as bitmasks over the ``2**n`` subsets of ``{0..n-1}``
    and grown one face at a time; each layer is reduced to canonical forms
    (minimal mask over all vertex permutations).  The empty complex is
    excluded.
    """
    if not 1 <= n <= 6:
        raise ValueError("supported for 1 <= n <= 6")
    size = 1 << n
    tables, nbytes = _perm_tables(n)
    facet_mask = [0] * size
    for s in range(1, size):
        for i in range(n):
            if s >> i & 1:
                facet_mask[s] |= 1 << (s ^ (1 << i))
    layer = [1]  # only the empty face
    found = []
    while layer:
        cands = set()
        for m in layer:
            for s in range(1, size):
                if not m >> s & 1 and m & facet_mask[s] == facet_mask[s]:
                    cands.add(m | 1 << s)
        if not cands:
            break
        canon = _canonical_masks(np.array(sorted(cands), dtype=np.uint64), tables, nbytes)
        layer = sorted({int(c) for c in canon})
        found.extend(layer)
    return [mask_to_complex(m, n) for m in found]
