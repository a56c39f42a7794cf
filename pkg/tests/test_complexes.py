import json
from functools import lru_cache

import pytest

from ttlab.combinatorics import enumerate_outerplanar, enumerate_pairings
from ttlab.complexes import (
    DegenerateSize,
    EmbeddedComplex2,
    MembershipFailed,
    T0Complex,
    Triangulation3D,
    complex_from_t0,
    cut_along,
    distinguished_tree,
    id_hierarchical,
    id_pi,
    split,
    tetra_tree_from_apollonian,
    triangulation_to_triple,
    triple_to_triangulation,
    verify_membership,
)
from ttlab.meander import loop_count, zones
from ttlab.planar import TripleTree, TripleRejected, glue, is_in_A, is_in_H, validate_triple


@lru_cache(maxsize=None)
def brute_triples(n):
    """All triple trees of size n by direct filtering (test oracle)."""
    out = []
    for t in enumerate_outerplanar(n):
        pis = list(enumerate_pairings(n))
        hs = [pi for pi in pis if is_in_H(t, pi)]
        if not hs:
            continue
        as_ = [pi for pi in pis if is_in_A(t, pi)]
        for ph in hs:
            for pa in as_:
                out.append(validate_triple(t, ph, pa))
    return out


def single_triangle_complex():
    # One complex triangle: two oriented triangles attached slotwise, all
    # three edges free.
    pi_t = (5, 4, 3, 2, 1, 0)
    return EmbeddedComplex2(pi_t=pi_t, pi_c=pi_t)


def test_single_triangle_splits_to_double_triangle():
    c = single_triangle_complex()
    assert c.n_triangles == 1
    assert c.n_edges == 3 and c.free_edges == frozenset(range(3))
    surf = split(c)
    assert surf.n_faces == 2 and surf.n_vertices == 3 and surf.planar


def test_embedded_complex_rejects_same_triangle_pairing():
    with pytest.raises(ValueError):
        EmbeddedComplex2(pi_t=(1, 0, 3, 2, 5, 4), pi_c=(5, 4, 3, 2, 1, 0))


def test_id_hierarchical_base_case():
    for t in enumerate_outerplanar(2):
        for pi in enumerate_pairings(2):
            if is_in_H(t, pi):
                c = id_hierarchical(glue(t, pi))
                assert c.n_triangles == 1
                assert c.is_tree_of_triangles()


def test_id_hierarchical_round_trip_H4():
    for t in enumerate_outerplanar(4):
        for pi in enumerate_pairings(4):
            if not is_in_H(t, pi):
                continue
            h = glue(t, pi)
            c = id_hierarchical(h)
            assert c.is_tree_of_triangles()
            surf = split(c)
            assert surf.twin == h.twin and surf.vertex == h.vertex


def test_id_hierarchical_edge_multiplicities_H5():
    seen = 0
    for t in enumerate_outerplanar(5):
        for pi in enumerate_pairings(5):
            if not is_in_H(t, pi):
                continue
            seen += 1
            h = glue(t, pi)
            c = id_hierarchical(h)
            # Every complex edge of multiplicity k collects k parallel edges
            # of h linking the same two vertex classes.
            total = 0
            for e in range(c.n_edges):
                slots = c.edge_slots[e]
                ends = {
                    frozenset((h.vertex[s], h.head(s))) for s in slots
                }
                assert len(ends) == 1
                total += c.edge_multiplicity(e)
            assert total == h.n_edges
    assert seen == 270


def test_id_pi_restricts_to_the_pairings():
    # On boundary slots, pi_t realizes pi_h and pi_c realizes pi.
    for n in (2, 3, 4):
        for tt in brute_triples(n):
            idc = id_pi(tt.t, tt.pi_h, tt.pi_a)
            slots = idc.boundary_slots
            for k in range(2 * n):
                assert idc.complex.pi_c[slots[k]] == slots[tt.pi_a.partner[k]]
                assert idc.complex.pi_t[slots[k]] == slots[tt.pi_h.partner[k]]


def test_id_pi_equals_id_hierarchical_on_diagonal():
    for t in enumerate_outerplanar(3):
        for pi in enumerate_pairings(3):
            if not is_in_H(t, pi):
                continue
            idc = id_pi(t, pi, pi)
            c2 = id_hierarchical(glue(t, pi))
            assert idc.complex.pi_t == c2.pi_t and idc.complex.pi_c == c2.pi_c


def test_split_of_id_pi_is_glue():
    for n in (3, 4):
        for tt in brute_triples(n):
            idc = id_pi(tt.t, tt.pi_h, tt.pi_a)
            surf = split(idc.complex)
            target = glue(tt.t, tt.pi_a)
            assert surf.twin == target.twin and surf.vertex == target.vertex


def test_distinguished_tree_matches_zone_tree():
    for n in (3, 4, 5):
        for tt in brute_triples(n):
            idc = id_pi(tt.t, tt.pi_h, tt.pi_a)
            e = idc.distinguished_edges
            assert len(e) == loop_count(tt.pi_h, tt.pi_a)
            c = idc.complex
            # E spans all vertices of the complex: loop count + 1 of them.
            assert c.n_vertices == len(e) + 1
            touched = set()
            for eid in e:
                touched.update(c.edge_endpoints(eid))
            assert touched == set(range(c.n_vertices))
            # Zone/vertex correspondence: two positions lie in the same white
            # (black) zone iff their white (black) corners are identified.
            ms = zones(tt.pi_h, tt.pi_a)
            v = c.vertex_of_corner
            slots = idc.boundary_slots
            white_corner = [
                (slots[k] - slots[k] % 3) + ((slots[k] + 1) % 3)
                if k % 2 == 0
                else slots[k]
                for k in range(2 * n)
            ]
            for i in range(2 * n):
                for j in range(i + 1, 2 * n):
                    assert (ms.white_zone[i] == ms.white_zone[j]) == (
                        v[white_corner[i]] == v[white_corner[j]]
                    )


def test_diagonal_distinguished_tree_is_free_edges():
    for t in enumerate_outerplanar(4):
        for pi in enumerate_pairings(4):
            if not is_in_H(t, pi):
                continue
            idc = id_pi(t, pi, pi)
            # The distinguished edges land on free edges of the tree of
            # triangles, one per glued boundary pair.
            assert idc.distinguished_edges <= idc.complex.free_edges
            assert len(idc.distinguished_edges) == 4


def test_cut_along_nothing_is_identity():
    c = single_triangle_complex()
    c2, cut = cut_along(c, set())
    assert c2.pi_c == c.pi_c and cut == frozenset()


def test_cut_all_edges_of_tree_gives_disjoint_triangles():
    for t in enumerate_outerplanar(3):
        for pi in enumerate_pairings(3):
            if not is_in_H(t, pi):
                continue
            c = id_hierarchical(glue(t, pi))
            c2, cut = cut_along(c, set(range(c.n_edges)))
            assert c2.pi_c == c2.pi_t
            assert len(cut) == c2.n_edges
            assert c2.free_edges == frozenset(range(c2.n_edges))


def test_tetra_tree_single_tetrahedron(tetrahedron_boundary):
    tree = tetra_tree_from_apollonian(tetrahedron_boundary)
    assert tree.n_tetrahedra == 1 and not tree.internal
    assert len(tree.boundary) == 4


def test_tetra_tree_rejects_double_triangle(double_triangle):
    with pytest.raises(ValueError):
        tetra_tree_from_apollonian(double_triangle)


def test_tetra_tree_boundary_round_trip_n5():
    for t in enumerate_outerplanar(5):
        for pi in enumerate_pairings(5):
            if not is_in_A(t, pi):
                continue
            a = glue(t, pi)
            tree = tetra_tree_from_apollonian(a)
            assert tree.n_tetrahedra == a.n_vertices - 3
            assert len(tree.internal) == 2 * (tree.n_tetrahedra - 1)
            for f, (i, fpos) in tree.boundary.items():
                assert sorted(tree.face_labels(i, fpos)) == sorted(a.face_classes(f))


def test_triple_to_triangulation_size4():
    triples = brute_triples(4)
    assert len(triples) == 20
    for tt in triples:
        tri3 = triple_to_triangulation(tt)
        assert tri3.n_tetrahedra == 2
        assert tri3.euler_characteristic() == 0
        assert tri3.n_vertices == tt.loops + 1
        bundle = complex_from_t0(tri3)
        assert bundle.complex.n_triangles == 3
    with_three_loops = [tt for tt in triples if tt.loops == 3]
    assert len(with_three_loops) == 12
    assert all(triple_to_triangulation(tt).n_vertices == 4 for tt in with_three_loops)


def test_triple_to_triangulation_rejects_degenerate():
    tt = brute_triples(2)[0]
    with pytest.raises(DegenerateSize):
        triple_to_triangulation(tt)


def test_membership_and_round_trip_n5():
    for n in (4, 5):
        keys = set()
        for tt in brute_triples(n):
            tri3 = triple_to_triangulation(tt)
            ok, diags = verify_membership(tri3)
            assert ok, diags
            assert tri3.n_tetrahedra == n - 2
            assert tri3.n_vertices == tt.loops + 1
            back = triangulation_to_triple(tri3)
            assert back.t.triangles == tt.t.triangles
            assert back.pi_h == tt.pi_h and back.pi_a == tt.pi_a
            keys.add(tri3.canonical_form())
        assert len(keys) == len(brute_triples(n))


def test_tampered_e_is_rejected():
    tt = brute_triples(4)[0]
    tri3 = triple_to_triangulation(tt)
    e_ids = tri3.e_edge_ids()
    non_e = [
        key for key, cls in tri3.edge_classes.items() if cls not in e_ids
    ]
    e_list = sorted(tri3.e_edges)
    tampered = Triangulation3D(
        n_tetrahedra=tri3.n_tetrahedra,
        gluings=tri3.gluings,
        t0_faces=tri3.t0_faces,
        e_edges=frozenset(e_list[1:] + [min(non_e)]),
        root=tri3.root,
    )
    ok, diags = verify_membership(tampered)
    assert not ok and diags


def test_e_with_cycle_reports_ecycle():
    tt = next(t for t in brute_triples(4) if t.loops == 3)
    tri3 = triple_to_triangulation(tt)
    e_ids = tri3.e_edge_ids()
    vc = tri3.vertex_classes
    # Add one extra edge closing a cycle on the tree (keep E oversized).
    extra = None
    for key, cls in tri3.edge_classes.items():
        i, a, b = key
        if cls not in e_ids and vc[(i, a)] != vc[(i, b)]:
            extra = key
            break
    assert extra is not None
    tampered = Triangulation3D(
        n_tetrahedra=tri3.n_tetrahedra,
        gluings=tri3.gluings,
        t0_faces=tri3.t0_faces,
        e_edges=tri3.e_edges | {extra},
        root=tri3.root,
    )
    ok, diags = verify_membership(tampered)
    assert not ok and "ECycle" in diags
    with pytest.raises(MembershipFailed):
        triangulation_to_triple(tampered)


def test_triangulation3d_json_round_trip():
    tt = brute_triples(4)[5]
    tri3 = triple_to_triangulation(tt)
    data = json.loads(json.dumps(tri3.to_json()))
    back = Triangulation3D.from_json(data)
    assert back.canonical_form() == tri3.canonical_form()
    assert triangulation_to_triple(back).key() == tt.key()
