import itertools

import networkx as nx
import numpy as np
import pytest

from catkit import samples
from catkit.complexes import (CubicalComplex, SimplicialComplex, all_right_cat1_verdict, barycentric_subdivision,
                              bhv_link_complex, complex_classes, complex_mask, cubical_analog, cubical_vertex_link,
                              is_flag, is_isomorphic, link, no_triangle_condition, no_triangle_in_all_links,
                              splits_compatible)

HOLLOW = SimplicialComplex([[0, 1], [1, 2], [0, 2]])
FILLED = SimplicialComplex([[0, 1, 2]])
OCTAHEDRON = SimplicialComplex([a, b, c] for a in ("x", "X") for b in ("y", "Y") for c in ("z", "Z"))


def flag_by_cliques(S):
    # every pairwise adjacent vertex set must be a face
    verts = S.vertices
    edges = {f for f in S.faces if len(f) == 2}
    for k in range(3, len(verts) + 1):
        for sub in itertools.combinations(verts, k):
            if all(frozenset(e) in edges for e in itertools.combinations(sub, 2)) and sub not in S:
                return False
    return True


def test_closure_and_maximal():
    S = SimplicialComplex([[0, 1, 2], [1, 2], [3]])
    assert S.is_valid()
    assert S.f_vector() == [4, 3, 1]
    assert len(S.maximal) == 2


def test_json_round_trip():
    B = barycentric_subdivision(FILLED)
    assert SimplicialComplex.from_dict(B.to_dict()) == B


def test_flag_examples():
    assert is_flag(FILLED) == (True, None)
    assert is_flag(HOLLOW) == (False, (0, 1, 2))
    assert is_flag(OCTAHEDRON)[0]
    boundary_of_tetrahedron = SimplicialComplex(itertools.combinations(range(4), 3))
    ok, w = is_flag(boundary_of_tetrahedron)
    assert not ok and w == (0, 1, 2, 3)


def test_no_triangle():
    assert no_triangle_condition(HOLLOW) == (False, (0, 1, 2))
    assert no_triangle_condition(FILLED)[0]


def test_link():
    L = link(OCTAHEDRON, ["x"])
    assert L == SimplicialComplex([[b, c] for b in ("y", "Y") for c in ("z", "Z")])
    with pytest.raises(ValueError):
        link(FILLED, [0, 5])


def test_link_of_flag_is_flag():
    rng = np.random.default_rng(8)
    for _ in range(100):
        S = samples.random_complex(rng, 6, 5)
        if not is_flag(S)[0]:
            continue
        for sigma in S.faces:
            assert is_flag(link(S, sigma))[0]


def test_no_trig_witness_in_a_link():
    empty_tet = SimplicialComplex(itertools.combinations(range(4), 3))
    ok, (sigma, tri) = no_triangle_in_all_links(empty_tet)
    assert not ok
    assert len(sigma) == 1 and sigma[0] not in tri


def test_barycentric():
    B = barycentric_subdivision(FILLED)
    assert B.f_vector() == [7, 12, 6]
    assert is_flag(B)[0]
    assert is_flag(barycentric_subdivision(HOLLOW))[0]


def test_cat1_verdicts():
    v = all_right_cat1_verdict(HOLLOW)
    assert v.verdict == "NotCAT1"
    assert v.witness.vertices == (0, 1, 2)
    assert all_right_cat1_verdict(FILLED).verdict == "CAT1"
    assert all_right_cat1_verdict(HOLLOW, edges_at_least_half_pi=True).verdict == "Undetermined"


def test_cubical_square():
    # two isolated points: the cube is a square, the analog its boundary 4-cycle
    Q = cubical_analog(SimplicialComplex([], vertices=["a", "b"]))
    assert Q.f_vector() == [4, 4]
    assert Q.is_closed()


def test_cubical_links_reproduce():
    for S in (HOLLOW, FILLED, OCTAHEDRON, SimplicialComplex([[0, 1], [2]])):
        Q = cubical_analog(S)
        for v in Q.vertices():
            assert cubical_vertex_link(Q, v) == S
        masks = Q.vertex_link_masks() if Q.N <= 6 else None
        if masks is not None:
            assert (masks == np.uint64(complex_mask(S))).all()


def test_cubical_face_outside():
    with pytest.raises(ValueError):
        CubicalComplex(2, [(0, 4)])


def brute_classes(n):
    subsets = [frozenset(c) for k in range(1, n + 1) for c in itertools.combinations(range(n), k)]
    perms = list(itertools.permutations(range(n)))
    seen = set()
    for bits in range(1, 1 << len(subsets)):
        fam = [s for i, s in enumerate(subsets) if bits >> i & 1]
        fs = set(fam)
        if any(f - {v} not in fs for f in fam if len(f) > 1 for v in f):
            continue
        canon = min(tuple(sorted(tuple(sorted(p[v] for v in f)) for f in fam)) for p in perms)
        seen.add(canon)
    return len(seen)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_class_counts_match_brute_force(n):
    assert len(complex_classes(n)) == brute_classes(n)


def test_classes_pairwise_distinct():
    cs = complex_classes(4)
    for a, b in itertools.combinations(cs, 2):
        if len(a.vertices) == len(b.vertices) and a.f_vector() == b.f_vector():
            assert is_isomorphic(a, b) is None


def test_flag_matches_clique_check():
    for S in complex_classes(5):
        assert is_flag(S)[0] == flag_by_cliques(S)
        assert is_flag(S)[0] == no_triangle_in_all_links(S)[0]


def test_isomorphism():
    A = SimplicialComplex([[0, 1, 2], [2, 3]])
    B = SimplicialComplex([["c", "d", "a"], ["a", "b"]])
    m = is_isomorphic(A, B)
    assert m is not None and m[2] == "a"
    assert is_isomorphic(A, HOLLOW) is None


def test_bhv_small():
    S3, f3 = bhv_link_complex(3)
    assert len(S3.vertices) == 3 and S3.dim == 0 and f3[0]
    S4, f4 = bhv_link_complex(4)
    assert f4[0]
    assert nx.is_isomorphic(S4.graph, nx.petersen_graph())
    assert S4.dim == 1
    S5, f5 = bhv_link_complex(5)
    assert f5[0] and len(S5.vertices) == 25


def test_bhv_faces_are_compatible_sets():
    S, _ = bhv_link_complex(4)
    verts = S.vertices
    for a, b in itertools.combinations(verts, 2):
        assert ((a, b) in S) == splits_compatible(a, b)
