"""Embedded 2-complexes, trees of tetrahedra, and the 3D bijection.

An embedded 2-complex with m triangles is encoded by 2m oriented triangles
(the two preimages of each complex triangle on the underlying surface) and
two fixed-point-free involutions of their 6m edge slots: pi_c glues the
slots into the surface and pi_t attaches the oriented triangles in pairs.
Slot 3f+p of oriented triangle f is the edge from corner p to corner p+1
(the edge opposite corner p+2).  Complex edges are the orbits of the group
generated by pi_t and pi_c: an edge lying in k complex triangles has an
orbit of 2k slots and its k surface edges are the pi_c pairs inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from .combinatorics import DisjointSets, NonCrossingPairing, OuterplanarTriangulation
from .meander import loop_count
from .planar import (
    Triangulation2D,
    TripleTree,
    apollonian_peel,
    companion_pairing,
    glue,
    unglue_faces,
    validate_triple,
)


class MembershipFailed(Exception):
    """Decorated triangulation is not in the triple-tree family."""

    def __init__(self, diagnostics: list[str]):
        super().__init__(", ".join(diagnostics))
        self.diagnostics = diagnostics


class DegenerateSize(Exception):
    """Triple trees of size < 4 have no tetrahedra to build."""


@dataclass(frozen=True)
class EmbeddedComplex2:
    """Pairing encoding of an embedded 2-complex (see module docstring)."""

    pi_t: tuple[int, ...]
    pi_c: tuple[int, ...]

    def __post_init__(self):
        n = len(self.pi_t)
        if len(self.pi_c) != n or n % 6 != 0:
            raise ValueError("slot arrays must have equal length 6m")
        for pi in (self.pi_t, self.pi_c):
            for s, u in enumerate(pi):
                if not 0 <= u < n or u == s or pi[u] != s:
                    raise ValueError("slot pairing is not a fixed-point-free involution")
        for s, u in enumerate(self.pi_t):
            if u // 3 == s // 3:
                raise ValueError("pi_t may not pair slots of the same triangle")
        # Orientation side condition: paired triangles attach top-to-top,
        # so the slot bijection reverses the cyclic order.
        for f in range(self.n_oriented):
            g = self.pi_t[3 * f] // 3
            for p in range(3):
                if self.pi_t[3 * f + p] // 3 != g:
                    raise ValueError("pi_t does not pair triangles slotwise")
            q0 = self.pi_t[3 * f] % 3
            for p in range(3):
                if self.pi_t[3 * f + p] % 3 != (q0 - p) % 3:
                    raise ValueError("pi_t pairing is not orientation-reversing")

    @property
    def n_slots(self) -> int:
        return len(self.pi_t)

    @property
    def n_oriented(self) -> int:
        return self.n_slots // 3

    @property
    def n_triangles(self) -> int:
        """Number of complex triangles (pairs of oriented triangles)."""
        return self.n_oriented // 2

    @cached_property
    def triangle_pair_id(self) -> tuple[int, ...]:
        """Complex-triangle id of each oriented triangle, first-appearance order."""
        ids = [-1] * self.n_oriented
        nxt = 0
        for f in range(self.n_oriented):
            if ids[f] == -1:
                ids[f] = ids[self.pi_t[3 * f] // 3] = nxt
                nxt += 1
        return tuple(ids)

    @cached_property
    def edge_of_slot(self) -> tuple[int, ...]:
        """Complex-edge id per slot: orbits of <pi_t, pi_c>."""
        ds = DisjointSets(self.n_slots)
        for s in range(self.n_slots):
            ds.union(s, self.pi_t[s])
            ds.union(s, self.pi_c[s])
        return tuple(ds.canonical_labels())

    @property
    def n_edges(self) -> int:
        return max(self.edge_of_slot) + 1

    @cached_property
    def edge_slots(self) -> tuple[tuple[int, ...], ...]:
        slots: list[list[int]] = [[] for _ in range(self.n_edges)]
        for s, e in enumerate(self.edge_of_slot):
            slots[e].append(s)
        return tuple(tuple(v) for v in slots)

    def edge_multiplicity(self, e: int) -> int:
        """Number of complex triangles containing edge e (with multiplicity)."""
        return len(self.edge_slots[e]) // 2

    @cached_property
    def free_edges(self) -> frozenset[int]:
        return frozenset(e for e in range(self.n_edges) if self.edge_multiplicity(e) == 1)

    def corner_image_under_pi_t(self, f: int, k: int) -> tuple[int, int]:
        """Corner k of oriented triangle f on its pi_t partner."""
        q = self.pi_t[3 * f + k]
        return q // 3, (q + 1) % 3

    def _corner_classes(self, use_pi_t: bool) -> tuple[int, ...]:
        ds = DisjointSets(self.n_slots)  # corner c of f is id 3f+c
        for s in range(self.n_slots):
            u = self.pi_c[s]
            f, p = s // 3, s % 3
            g, q = u // 3, u % 3
            # Surface gluing reverses the edge: tail ~ head and head ~ tail.
            ds.union(3 * f + p, 3 * g + (q + 1) % 3)
            ds.union(3 * f + (p + 1) % 3, 3 * g + q)
        if use_pi_t:
            for f in range(self.n_oriented):
                for k in range(3):
                    g, c = self.corner_image_under_pi_t(f, k)
                    ds.union(3 * f + k, 3 * g + c)
        return tuple(ds.canonical_labels())

    @cached_property
    def vertex_of_corner(self) -> tuple[int, ...]:
        """Vertex class of corner c of oriented triangle f, at index 3f+c."""
        return self._corner_classes(use_pi_t=True)

    @property
    def n_vertices(self) -> int:
        return max(self.vertex_of_corner) + 1

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        s = self.edge_slots[e][0]
        f, p = s // 3, s % 3
        v = self.vertex_of_corner
        return v[3 * f + p], v[3 * f + (p + 1) % 3]

    def is_tree_of_triangles(self) -> bool:
        """Dual triangle/edge incidence graph is acyclic and connected."""
        n_t = self.n_triangles
        ds = DisjointSets(n_t + self.n_edges)
        for f in range(self.n_oriented):
            g = self.pi_t[3 * f] // 3
            if g < f:
                continue
            tid = self.triangle_pair_id[f]
            for p in range(3):
                if not ds.union(tid, n_t + self.edge_of_slot[3 * f + p]):
                    return False
        return ds.components == 1

    def split(self) -> Triangulation2D:
        """Glue the oriented triangles along pi_c into 2D triangulations.

        Slots become darts unchanged; the result may have several connected
        components (the planar flag then requires chi = 2 on each).
        """
        labels = DisjointSets(self.n_slots)
        for s in range(self.n_slots):
            u = self.pi_c[s]
            f, p = s // 3, s % 3
            g, q = u // 3, u % 3
            labels.union(3 * f + p, 3 * g + (q + 1) % 3)
            labels.union(3 * f + (p + 1) % 3, 3 * g + q)
        vertex = tuple(labels.canonical_labels())
        n_vertices = labels.components
        comp = DisjointSets(self.n_oriented)
        for s in range(self.n_slots):
            comp.union(s // 3, self.pi_c[s] // 3)
        # chi per component
        planar = True
        for root in {comp.find(f) for f in range(self.n_oriented)}:
            fs = [f for f in range(self.n_oriented) if comp.find(f) == root]
            vs = {vertex[3 * f + c] for f in fs for c in range(3)}
            es = {min(3 * f + p, self.pi_c[3 * f + p]) for f in fs for p in range(3)}
            if len(vs) - len(es) + len(fs) != 2:
                planar = False
        return Triangulation2D(
            twin=self.pi_c, vertex=vertex, n_vertices=n_vertices, planar=planar
        )


def split(c: EmbeddedComplex2) -> Triangulation2D:
    return c.split()


# ---------------------------------------------------------------------------
# Identification maps
# ---------------------------------------------------------------------------

def _pi_t_from_companions(surface: Triangulation2D) -> tuple[int, ...]:
    """Slot attachment pairing two companion faces along edges that link the
    same two vertex classes."""
    pairing = companion_pairing(surface)
    if pairing is None:
        raise ValueError("surface is not hierarchical")
    pi_t = [-1] * surface.n_darts
    for f, g in pairing.items():
        if g < f:
            continue
        cls_g = surface.face_classes(g)
        for p in range(3):
            ends = {surface.vertex[3 * f + p], surface.vertex[3 * f + (p + 1) % 3]}
            match = [
                q
                for q in range(3)
                if {cls_g[q], cls_g[(q + 1) % 3]} == ends
            ]
            if len(match) != 1:
                raise ValueError("ambiguous edge identification between companions")
            pi_t[3 * f + p] = 3 * g + match[0]
            pi_t[3 * g + match[0]] = 3 * f + p
    return tuple(pi_t)


def id_hierarchical(h: Triangulation2D) -> EmbeddedComplex2:
    """The tree of triangles obtained by identifying companion faces of a
    hierarchical triangulation.  Inverse of split on that domain."""
    c = EmbeddedComplex2(pi_t=_pi_t_from_companions(h), pi_c=h.twin)
    if not c.is_tree_of_triangles():
        raise ValueError("identification did not produce a tree of triangles")
    return c


@dataclass(frozen=True)
class IdComplex:
    """Embedded 2-complex built from (t, pi_h, pi) plus the cut bookkeeping.

    boundary_slots[k] is the slot (= dart of Glue(t, .)) realizing boundary
    position k; the distinguished edges are the complex edges all of whose
    slots are boundary slots.
    """

    complex: EmbeddedComplex2
    boundary_slots: tuple[int, ...]

    @cached_property
    def distinguished_edges(self) -> frozenset[int]:
        boundary = set(self.boundary_slots)
        edge_of = self.complex.edge_of_slot
        hit = {edge_of[s] for s in boundary}
        for e in hit:
            slots = self.complex.edge_slots[e]
            if not all(s in boundary for s in slots):
                raise AssertionError("distinguished corners are not all-or-none")
        return frozenset(hit)

    @property
    def root_slot(self) -> int:
        return self.boundary_slots[0]


def id_pi(
    t: OuterplanarTriangulation, pi_h: NonCrossingPairing, pi
) -> IdComplex:
    """Attach the triangles of Glue(t, pi) according to the companion
    structure of Glue(t, pi_h)."""
    h = glue(t, pi_h)
    pi_t = _pi_t_from_companions(h)
    target = glue(t, pi)
    return IdComplex(
        complex=EmbeddedComplex2(pi_t=pi_t, pi_c=target.twin),
        boundary_slots=target.position_darts,
    )


def distinguished_tree(
    t: OuterplanarTriangulation, pi_h: NonCrossingPairing, pi: NonCrossingPairing
) -> frozenset[int]:
    """Edge set E(t, pi_h, pi): complex edges whose corners are all glued
    boundary edges.  In bijection with the zone tree of [pi_h, pi]."""
    return id_pi(t, pi_h, pi).distinguished_edges


def cut_along(
    c: EmbeddedComplex2, edges: frozenset[int] | set[int]
) -> tuple[EmbeddedComplex2, frozenset[int]]:
    """Cut the complex along a set of its edges.

    Every cut edge contained in k triangles becomes k free edges (pi_c is
    replaced by pi_t on the affected orbits); triangles left touching only
    through a vertex separate automatically because vertices are recomputed
    from the pairings.  Returns the cut complex and the set Cut(E) of
    duplicate edges (ids in the new complex).
    """
    new_pi_c = list(c.pi_c)
    affected: list[int] = []
    for e in edges:
        for s in c.edge_slots[e]:
            new_pi_c[s] = c.pi_t[s]
            affected.append(s)
    out = EmbeddedComplex2(pi_t=c.pi_t, pi_c=tuple(new_pi_c))
    cut_ids = frozenset(out.edge_of_slot[s] for s in affected)
    return out, cut_ids


# ---------------------------------------------------------------------------
# Trees of tetrahedra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeOfTetrahedra:
    """Tree of tetrahedra with its boundary identified face by face.

    Tetrahedron i has the four vertex labels vertices[i] (labels of the
    source Apollonian triangulation); face f omits vertices[i][f].
    internal maps each internally glued side to its partner (labels match
    identically); boundary maps each face of the source triangulation to
    the side of the tree realizing it.
    """

    vertices: tuple[tuple[int, int, int, int], ...]
    internal: dict[tuple[int, int], tuple[int, int]]
    boundary: dict[int, tuple[int, int]]

    @property
    def n_tetrahedra(self) -> int:
        return len(self.vertices)

    def local_index(self, tetra: int, label: int) -> int:
        return self.vertices[tetra].index(label)

    def face_labels(self, tetra: int, face: int) -> tuple[int, int, int]:
        v = self.vertices[tetra]
        return tuple(v[i] for i in range(4) if i != face)


def tetra_tree_from_apollonian(a: Triangulation2D) -> TreeOfTetrahedra:
    """The unique tree of tetrahedra whose boundary is the given Apollonian
    triangulation (reject double triangles: no tetrahedron exists)."""
    peel = apollonian_peel(a)
    if peel is None:
        raise ValueError("triangulation is not Apollonian")
    steps, final_faces = peel
    if a.n_vertices < 4:
        raise ValueError("an Apollonian with fewer than 4 vertices bounds no tetrahedra")

    vertices: list[tuple[int, int, int, int]] = []
    internal: dict[tuple[int, int], tuple[int, int]] = {}
    boundary: dict[int, tuple[int, int]] = {}
    created: dict[int, tuple[int, int]] = {}
    n_orig = a.n_faces

    def consume(face_id: int, side: tuple[int, int]) -> None:
        if face_id < n_orig:
            boundary[face_id] = side
        else:
            other = created.pop(face_id)
            internal[other] = side
            internal[side] = other

    for k, (v, nbrs, f_opp, new_f) in enumerate(steps):
        vertices.append((v,) + nbrs)
        for i, f_old in enumerate(f_opp):
            consume(f_old, (k, i + 1))  # f_opp[i] lies opposite neighbor i
        created[new_f] = (k, 0)

    base = len(steps)
    corners = sorted({u for cls in final_faces.values() for u in cls})
    vertices.append(tuple(corners))
    for f_id, cls in final_faces.items():
        (omitted,) = set(corners) - set(cls)
        consume(f_id, (base, corners.index(omitted)))
    if created:
        raise AssertionError("unconsumed internal faces")
    return TreeOfTetrahedra(
        vertices=tuple(vertices), internal=internal, boundary=boundary
    )


# ---------------------------------------------------------------------------
# Closed 3-dimensional triangulations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Triangulation3D:
    """Closed 3D triangulation with face gluings and its decorations.

    gluings[(i, f)] = (j, g, perm) glues face f of tetrahedron i to face g
    of tetrahedron j; perm maps the vertices of face f listed in increasing
    local order to local vertices of j.  t0_faces are the gluings interior
    to the spanning tree of tetrahedra; e_edges are the canonical keys
    (tetra, i, j) of the edge classes in the spanning edge tree; the root
    is an oriented edge (ordered local pair) inside a marked face side not
    in T0.
    """

    n_tetrahedra: int
    gluings: dict[tuple[int, int], tuple[int, int, tuple[int, int, int]]]
    t0_faces: frozenset[frozenset[tuple[int, int]]]
    e_edges: frozenset[tuple[int, int, int]]
    root: tuple[int, int, tuple[int, int]]

    def __post_init__(self):
        if len(self.gluings) != 4 * self.n_tetrahedra:
            raise ValueError("every face side must be glued")
        for (i, f), (j, g, perm) in self.gluings.items():
            if (j, g) == (i, f):
                raise ValueError("a face side may not be glued to itself")
            back = self.gluings.get((j, g))
            if back is None or back[:2] != (i, f):
                raise ValueError("gluing table is not an involution on sides")
            vm = dict(zip(self._face_locals(f), perm))
            back_vm = dict(zip(self._face_locals(g), back[2]))
            if any(back_vm[b] != a for a, b in vm.items()):
                raise ValueError("gluing vertex maps are not mutually inverse")

    @staticmethod
    def _face_locals(face: int) -> tuple[int, int, int]:
        return tuple(v for v in range(4) if v != face)

    def vertex_map(self, i: int, f: int) -> dict[int, int]:
        """Local-vertex correspondence induced by gluing side (i, f)."""
        j, g, perm = self.gluings[(i, f)]
        return dict(zip(self._face_locals(f), perm))

    @cached_property
    def vertex_classes(self) -> dict[tuple[int, int], int]:
        ds = DisjointSets(4 * self.n_tetrahedra)
        for (i, f) in self.gluings:
            j, g, _ = self.gluings[(i, f)]
            for a, b in self.vertex_map(i, f).items():
                ds.union(4 * i + a, 4 * j + b)
        labels = ds.canonical_labels()
        return {(i, v): labels[4 * i + v] for i in range(self.n_tetrahedra) for v in range(4)}

    @property
    def n_vertices(self) -> int:
        return max(self.vertex_classes.values()) + 1

    @cached_property
    def edge_classes(self) -> dict[tuple[int, int, int], int]:
        pairs = [(a, b) for a in range(4) for b in range(a + 1, 4)]
        index = {p: k for k, p in enumerate(pairs)}
        ds = DisjointSets(6 * self.n_tetrahedra)
        for (i, f) in self.gluings:
            j, g, _ = self.gluings[(i, f)]
            vm = self.vertex_map(i, f)
            locs = self._face_locals(f)
            for x in range(3):
                for y in range(x + 1, 3):
                    a, b = locs[x], locs[y]
                    c, d = sorted((vm[a], vm[b]))
                    ds.union(6 * i + index[(a, b)], 6 * j + index[(c, d)])
        labels = ds.canonical_labels()
        return {
            (i, a, b): labels[6 * i + index[(a, b)]]
            for i in range(self.n_tetrahedra)
            for (a, b) in pairs
        }

    @property
    def n_edges(self) -> int:
        return max(self.edge_classes.values()) + 1

    @cached_property
    def n_triangles(self) -> int:
        return 2 * self.n_tetrahedra

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles - self.n_tetrahedra

    def e_edge_ids(self) -> frozenset[int]:
        return frozenset(self.edge_classes[key] for key in self.e_edges)

    def edge_key(self, cls_id: int) -> tuple[int, int, int]:
        return min(k for k, v in self.edge_classes.items() if v == cls_id)

    def to_json(self) -> dict:
        return {
            "format": "ttlab/1",
            "tetrahedra": self.n_tetrahedra,
            "gluings": [
                [list((*self.gluings[(i, f)][:2], list(self.gluings[(i, f)][2])))
                 for f in range(4)]
                for i in range(self.n_tetrahedra)
            ],
            "t0": sorted(sorted(map(list, pair)) for pair in self.t0_faces),
            "e": sorted(map(list, self.e_edges)),
            "root": {
                "tetra": self.root[0],
                "face": self.root[1],
                "edge": list(self.root[2]),
            },
        }

    @staticmethod
    def from_json(data: dict) -> "Triangulation3D":
        n = int(data["tetrahedra"])
        gluings = {}
        for i, faces in enumerate(data["gluings"]):
            for f, (j, g, perm) in enumerate(faces):
                gluings[(i, f)] = (int(j), int(g), tuple(int(x) for x in perm))
        t0 = frozenset(
            frozenset((int(i), int(f)) for i, f in pair) for pair in data["t0"]
        )
        e = frozenset(tuple(int(x) for x in key) for key in data["e"])
        root = (
            int(data["root"]["tetra"]),
            int(data["root"]["face"]),
            tuple(int(x) for x in data["root"]["edge"]),
        )
        return Triangulation3D(
            n_tetrahedra=n, gluings=gluings, t0_faces=t0, e_edges=e, root=root
        )

    def canonical_form(self) -> tuple:
        """Breadth-first relabeling from the root; equality on the result is
        equality of rooted decorated triangulations."""
        i0, f0, (a, b) = self.root
        # Local relabeling per tetra: old -> new in 0..3, anchored at the
        # root edge so isomorphic rooted objects get equal tables.
        third = [v for v in self._face_locals(f0) if v not in (a, b)][0]
        last = [v for v in range(4) if v not in (a, b, third)][0]
        first = [-1] * 4
        for new, old in enumerate((a, b, third, last)):
            first[old] = new
        order = [i0]
        relabel: dict[int, list[int]] = {i0: first}
        queue = [i0]
        while queue:
            i = queue.pop(0)
            lab = relabel[i]
            inv = sorted(range(4), key=lambda old: lab[old])  # new -> old
            for new_f in range(4):
                old_f = inv[new_f]
                j, g, _ = self.gluings[(i, old_f)]
                if j in relabel:
                    continue
                vm = self.vertex_map(i, old_f)
                new_lab = [-1] * 4
                used = set()
                for old_v, tgt in vm.items():
                    new_lab[tgt] = lab[old_v]
                    used.add(tgt)
                (missing,) = set(range(4)) - used
                new_lab[missing] = [x for x in range(4) if x not in set(new_lab)][0]
                relabel[j] = new_lab
                order.append(j)
                queue.append(j)
        tet_new = {old: new for new, old in enumerate(order)}

        def side(i: int, f: int) -> tuple[int, int]:
            # Face f omits vertex f; the new index omits the new label.
            return tet_new[i], relabel[i][f]

        table = []
        for new_i, old_i in enumerate(order):
            lab = relabel[old_i]
            inv = sorted(range(4), key=lambda old: lab[old])
            row = []
            for new_f in range(4):
                old_f = inv[new_f]
                j, g, _ = self.gluings[(old_i, old_f)]
                vm = self.vertex_map(old_i, old_f)
                tj, tg = side(j, g)
                perm_new = tuple(
                    relabel[j][vm[inv[x]]]
                    for x in self._face_locals(new_f)
                )
                row.append((tj, tg, perm_new))
            table.append(tuple(row))
        t0_new = frozenset(
            frozenset(side(i, f) for (i, f) in pair) for pair in self.t0_faces
        )
        e_ids = self.e_edge_ids()
        best: dict[int, tuple[int, int, int]] = {}
        for key, cls in self.edge_classes.items():
            if cls in e_ids:
                i, va, vb = key
                na, nb = sorted((relabel[i][va], relabel[i][vb]))
                cand = (tet_new[i], na, nb)
                if cls not in best or cand < best[cls]:
                    best[cls] = cand
        root_new = (0, relabel[i0][f0], (0, 1))
        return (
            tuple(table),
            tuple(sorted(tuple(sorted(p)) for p in t0_new)),
            tuple(sorted(best.values())),
            root_new,
        )


# ---------------------------------------------------------------------------
# Triple tree -> 3D triangulation
# ---------------------------------------------------------------------------

def _canonical_e_keys(
    tri3: Triangulation3D, raw_keys: set[tuple[int, int, int]]
) -> frozenset[tuple[int, int, int]]:
    classes = tri3.edge_classes
    wanted = {classes[k] for k in raw_keys}
    best: dict[int, tuple[int, int, int]] = {}
    for key, cls in classes.items():
        if cls in wanted and (cls not in best or key < best[cls]):
            best[cls] = key
    return frozenset(best.values())


def triple_to_triangulation(tt: TripleTree) -> Triangulation3D:
    """The decorated 3-sphere triangulation encoded by a triple tree.

    The Apollonian gluing is the boundary of the spanning tree of
    tetrahedra; the hierarchical companion structure prescribes how the
    remaining boundary faces attach in pairs.  A triple tree of size n
    yields n-2 tetrahedra, so sizes below 4 are rejected.
    """
    if tt.n < 4:
        raise DegenerateSize(f"size {tt.n} triple tree has no 3D realization")
    a = glue(tt.t, tt.pi_a)
    tree = tetra_tree_from_apollonian(a)
    idc = id_pi(tt.t, tt.pi_h, tt.pi_a)
    c = idc.complex

    gluings: dict[tuple[int, int], tuple[int, int, tuple[int, int, int]]] = {}
    for side, other in tree.internal.items():
        i, f = side
        j, g = other
        perm = tuple(tree.local_index(j, lab) for lab in tree.face_labels(i, f))
        gluings[side] = (j, g, perm)

    for f0 in range(c.n_oriented):
        g0 = c.pi_t[3 * f0] // 3
        if g0 < f0:
            continue
        # Corner k of face f0 attaches to corner q_k + 1 of its companion.
        corr = {}
        for k in range(3):
            qk = c.pi_t[3 * f0 + k] % 3
            corr[a.vertex[3 * f0 + k]] = a.vertex[3 * g0 + (qk + 1) % 3]
        (i, f), (j, g) = tree.boundary[f0], tree.boundary[g0]
        perm = tuple(
            tree.local_index(j, corr[tree.vertices[i][loc]])
            for loc in Triangulation3D._face_locals(f)
        )
        inv_corr = {v: k for k, v in corr.items()}
        perm_back = tuple(
            tree.local_index(i, inv_corr[tree.vertices[j][loc]])
            for loc in Triangulation3D._face_locals(g)
        )
        gluings[(i, f)] = (j, g, perm)
        gluings[(j, g)] = (i, f, perm_back)

    t0_faces = frozenset(
        frozenset((side, other)) for side, other in tree.internal.items()
    )

    # Root: the oriented gluing of boundary edge 0 inside its triangle.
    root_face = tt.t.boundary_incidence()[0][0]
    p0 = idc.boundary_slots[0] % 3
    ri, rf = tree.boundary[root_face]
    tail = tree.local_index(ri, a.vertex[3 * root_face + p0])
    head = tree.local_index(ri, a.vertex[3 * root_face + (p0 + 1) % 3])

    raw_e_keys = set()
    for e in idc.distinguished_edges:
        s = c.edge_slots[e][0]
        f0 = s // 3
        ti, tf = tree.boundary[f0]
        va = tree.local_index(ti, a.vertex[3 * f0 + s % 3])
        vb = tree.local_index(ti, a.vertex[3 * f0 + (s % 3 + 1) % 3])
        raw_e_keys.add((ti, min(va, vb), max(va, vb)))

    draft = Triangulation3D(
        n_tetrahedra=tree.n_tetrahedra,
        gluings=gluings,
        t0_faces=t0_faces,
        e_edges=frozenset(raw_e_keys),
        root=(ri, rf, (tail, head)),
    )
    return Triangulation3D(
        n_tetrahedra=draft.n_tetrahedra,
        gluings=draft.gluings,
        t0_faces=draft.t0_faces,
        e_edges=_canonical_e_keys(draft, raw_e_keys),
        root=draft.root,
    )


# ---------------------------------------------------------------------------
# 3D triangulation -> complex T^{T0} and back to the triple tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class T0Complex:
    """The embedded 2-complex left after merging T0 into a single 3-cell.

    sides lists the external (tetra, face) sides in oriented-triangle order;
    cycles[idx] is the oriented corner cycle of that side, so slot 3*idx+p
    is the dart cycles[idx][p] -> cycles[idx][p+1].  edge_class_of_slot maps
    slots to edge classes of the parent triangulation, e_slots marks the
    slots lying on the spanning edge tree, and root_slot realizes the root.
    """

    complex: EmbeddedComplex2
    sides: tuple[tuple[int, int], ...]
    cycles: tuple[tuple[int, int, int], ...]
    edge_class_of_slot: tuple[int, ...]
    e_slots: frozenset[int]
    root_slot: int

    def complex_edge_of_class(self) -> dict[int, int]:
        return {
            self.edge_class_of_slot[s]: self.complex.edge_of_slot[s]
            for s in range(self.complex.n_slots)
        }


def complex_from_t0(tri3: Triangulation3D) -> T0Complex:
    """Build T^{T0} from the face-gluing table.

    The surface gluing pi_c is found by rotating around each boundary edge
    of the tree of tetrahedra through its internal faces; orientations are
    propagated from the root side across the whole boundary sphere.
    """
    internal = {side for pair in tri3.t0_faces for side in pair}
    for pair in tri3.t0_faces:
        (i, f), (j, g) = tuple(pair)
        if tri3.gluings[(i, f)][:2] != (j, g):
            raise ValueError("t0_faces inconsistent with the gluing table")
    sides = tuple(
        sorted(
            (i, f)
            for i in range(tri3.n_tetrahedra)
            for f in range(4)
            if (i, f) not in internal
        )
    )
    side_index = {s: k for k, s in enumerate(sides)}

    def walk(i: int, f: int, a: int, b: int) -> tuple[int, int, int, int]:
        # Next external side around edge {a, b}, with the carried endpoints.
        steps = 0
        while True:
            f2 = next(v for v in range(4) if v not in (a, b, f))
            if (i, f2) not in internal:
                return i, f2, a, b
            j, g, _ = tri3.gluings[(i, f2)]
            vm = tri3.vertex_map(i, f2)
            i, f, a, b = j, g, vm[a], vm[b]
            steps += 1
            if steps > 4 * tri3.n_tetrahedra:
                raise ValueError("edge rotation does not close; T0 is not a tree")

    # Oriented corner cycles, propagated so twins run in opposite directions.
    ri, rf, (ra, rb) = tri3.root
    if (ri, rf) in internal:
        raise ValueError("root side lies inside T0")
    rc = next(v for v in range(4) if v not in (ra, rb, rf))
    cycles: dict[tuple[int, int], tuple[int, int, int]] = {(ri, rf): (ra, rb, rc)}
    queue = [(ri, rf)]
    partner_dart: dict[tuple[int, int, int], tuple[int, int, int]] = {}
    while queue:
        (i, f) = queue.pop(0)
        cyc = cycles[(i, f)]
        for p in range(3):
            a, b = cyc[p], cyc[(p + 1) % 3]
            j, g, a2, b2 = walk(i, f, a, b)
            partner_dart[(i, f, p)] = (j, g, -1)
            if (j, g) not in cycles:
                c2 = next(v for v in range(4) if v not in (a2, b2, g))
                cycles[(j, g)] = (b2, a2, c2)
                queue.append((j, g))
            cyc2 = cycles[(j, g)]
            q = cyc2.index(b2)
            if cyc2[(q + 1) % 3] != a2:
                raise ValueError("boundary orientation is inconsistent")
            partner_dart[(i, f, p)] = (j, g, q)
    if len(cycles) != len(sides):
        raise ValueError("boundary of T0 is disconnected")

    def slot(i: int, f: int, p: int) -> int:
        return 3 * side_index[(i, f)] + p

    pi_c = [-1] * (3 * len(sides))
    for (i, f, p), (j, g, q) in partner_dart.items():
        pi_c[slot(i, f, p)] = slot(j, g, q)

    pi_t = [-1] * (3 * len(sides))
    for (i, f) in sides:
        j, g, _ = tri3.gluings[(i, f)]
        vm = tri3.vertex_map(i, f)
        cyc, cyc2 = cycles[(i, f)], cycles[(j, g)]
        for p in range(3):
            a, b = vm[cyc[p]], vm[cyc[(p + 1) % 3]]
            q = cyc2.index(b)
            if cyc2[(q + 1) % 3] != a:
                raise ValueError("face gluing is orientation-violating")
            pi_t[slot(i, f, p)] = slot(j, g, q)

    edge_class_of_slot = tuple(
        tri3.edge_classes[
            (
                sides[s // 3][0],
                min(cycles[sides[s // 3]][s % 3], cycles[sides[s // 3]][(s % 3 + 1) % 3]),
                max(cycles[sides[s // 3]][s % 3], cycles[sides[s // 3]][(s % 3 + 1) % 3]),
            )
        ]
        for s in range(3 * len(sides))
    )
    e_ids = tri3.e_edge_ids()
    e_slots = frozenset(s for s, c in enumerate(edge_class_of_slot) if c in e_ids)
    root_slot = slot(ri, rf, cycles[(ri, rf)].index(ra))

    return T0Complex(
        complex=EmbeddedComplex2(pi_t=tuple(pi_t), pi_c=tuple(pi_c)),
        sides=sides,
        cycles=tuple(cycles[s] for s in sides),
        edge_class_of_slot=edge_class_of_slot,
        e_slots=e_slots,
        root_slot=root_slot,
    )


def verify_membership(tri3: Triangulation3D) -> tuple[bool, list[str]]:
    """Check the decorated-membership conditions, returning diagnostics.

    Conditions: T0 spans the dual graph as a tree, E spans the 1-skeleton
    as a tree, cutting T^{T0} along E leaves a tree of triangles, and the
    duplicated edges Cut(E) form a spanning tree of it.
    """
    diags: list[str] = []

    ds = DisjointSets(tri3.n_tetrahedra)
    t0_ok = len(tri3.t0_faces) == tri3.n_tetrahedra - 1
    for pair in tri3.t0_faces:
        sides_pair = tuple(pair)
        if len(sides_pair) != 2 or sides_pair[0][0] == sides_pair[1][0]:
            t0_ok = False
            break
        if tri3.gluings[sides_pair[0]][:2] != sides_pair[1]:
            t0_ok = False
            break
        if not ds.union(sides_pair[0][0], sides_pair[1][0]):
            t0_ok = False
            break
    if not (t0_ok and ds.components == 1):
        diags.append("T0NotSpanningTree")

    e_ids = tri3.e_edge_ids()
    vc = tri3.vertex_classes
    ds_v = DisjointSets(tri3.n_vertices)
    e_ok = len(e_ids) == len(tri3.e_edges)
    for key in tri3.e_edges:
        i, a, b = key
        if not ds_v.union(vc[(i, a)], vc[(i, b)]):
            diags.append("ECycle")
            e_ok = False
            break
    if e_ok and (len(e_ids) != tri3.n_vertices - 1 or ds_v.components != 1):
        diags.append("ENotSpanning")
        e_ok = False

    if diags:
        return False, diags

    bundle = complex_from_t0(tri3)
    cls_to_complex = bundle.complex_edge_of_class()
    try:
        cut_edges = {cls_to_complex[c] for c in e_ids}
    except KeyError:
        return False, ["EEdgeMissingFromComplex"]
    cut_c, cut_ids = cut_along(bundle.complex, cut_edges)
    if not cut_c.is_tree_of_triangles():
        diags.append("TT0ENotTreeOfTriangles")
        return False, diags

    verts = cut_c.vertex_of_corner
    ds_cut = DisjointSets(cut_c.n_vertices)
    cut_ok = True
    for e in cut_ids:
        u, v = cut_c.edge_endpoints(e)
        if not ds_cut.union(u, v):
            cut_ok = False
            break
    if not (cut_ok and ds_cut.components == 1):
        diags.append("CutENotSpanningTree")
        return False, diags
    return True, []


def triangulation_to_triple(tri3: Triangulation3D) -> TripleTree:
    """Inverse of triple_to_triangulation on the decorated family.

    The boundary sphere of T0, cut along the preimage of E from the root,
    recovers (t, pi_a); the triangle attachments pi_t restricted to the
    boundary positions recover pi_h.
    """
    ok, diags = verify_membership(tri3)
    if not ok:
        raise MembershipFailed(diags)
    bundle = complex_from_t0(tri3)
    c = bundle.complex
    surface = c.split()
    surface = Triangulation2D(
        twin=surface.twin,
        vertex=surface.vertex,
        n_vertices=surface.n_vertices,
        planar=surface.planar,
        e0_darts=bundle.e_slots,
        root_dart=bundle.root_slot,
    )
    try:
        faces, partner_a, contour = unglue_faces(surface)
        n = len(partner_a) // 2
        t = OuterplanarTriangulation(n, tuple(faces))
        pos_of_slot = {s: k for k, s in enumerate(contour)}
        partner_h = [pos_of_slot[c.pi_t[contour[k]]] for k in range(2 * n)]
        pi_a = NonCrossingPairing(n, tuple(partner_a))
        pi_h = NonCrossingPairing(n, tuple(partner_h))
        return validate_triple(t, pi_h, pi_a)
    except ValueError as exc:
        raise MembershipFailed([f"InconsistentReconstruction:{exc}"]) from exc
