"""Half-edge triangulations, the gluing map and its inverse, triple trees.

Conventions used throughout the package:

* Boundary vertices of an outerplanar triangulation are 0..2n-1 clockwise,
  boundary edge k joins k and k+1 (mod 2n), oriented k -> k+1 (tail k).
* Gluing edge i to edge j identifies them with opposite orientation, so
  vertex i ~ j+1 and i+1 ~ j.  Vertex 0 (origin of the root edge) is black
  and colors alternate along the boundary.
* Darts of a closed triangulation are numbered 3*f + p for face f and
  position p; next(3f+p) = 3f+(p+1)%3 and every face cycle satisfies
  head(d) = tail(next(d)).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

from .combinatorics import DisjointSets, NonCrossingPairing, OuterplanarTriangulation
from .meander import loop_count


class TripleRejected(Exception):
    """A candidate triple failed validation; .reason carries the cause."""

    NOT_HIERARCHICAL = "NotHierarchical"
    TREE_EDGE_IN_2CYCLE = "TreeEdgeIn2Cycle"
    NOT_APOLLONIAN = "NotApollonian"
    SIZE_MISMATCH = "SizeMismatch"

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Triangulation2D:
    """Closed 2D triangulation as a half-edge structure.

    twin is a fixed-point-free involution on darts, vertex[d] is the vertex
    class at the tail of d (class ids canonical by first appearance), and
    the faces are the triples (3f, 3f+1, 3f+2).  Gluing outputs additionally
    carry the distinguished edge set E0 (as the set of its darts), the root
    dart, and the dart realizing each boundary position of the cut polygon.
    """

    twin: tuple[int, ...]
    vertex: tuple[int, ...]
    n_vertices: int
    planar: bool
    e0_darts: frozenset[int] = frozenset()
    root_dart: Optional[int] = None
    position_darts: Optional[tuple[int, ...]] = None

    @property
    def n_darts(self) -> int:
        return len(self.twin)

    @property
    def n_faces(self) -> int:
        return len(self.twin) // 3

    @property
    def n_edges(self) -> int:
        return len(self.twin) // 2

    def nxt(self, d: int) -> int:
        return d - d % 3 + (d + 1) % 3

    def head(self, d: int) -> int:
        return self.vertex[self.nxt(d)]

    def face_of(self, d: int) -> int:
        return d // 3

    def faces(self) -> list[tuple[int, int, int]]:
        return [(3 * f, 3 * f + 1, 3 * f + 2) for f in range(self.n_faces)]

    def face_classes(self, f: int) -> tuple[int, int, int]:
        return (self.vertex[3 * f], self.vertex[3 * f + 1], self.vertex[3 * f + 2])

    def edge_id(self, d: int) -> int:
        return min(d, self.twin[d])

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def rotate(self, d: int) -> int:
        """Next outgoing dart around tail(d): next-in-face of the twin."""
        return self.nxt(self.twin[d])

    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for v in self.vertex:
            deg[v] += 1
        return deg

    def dart_table_csv(self) -> str:
        lines = ["# ttlab/1", "dart,twin,next,vertex"]
        for d in range(self.n_darts):
            lines.append(f"{d},{self.twin[d]},{self.nxt(d)},{self.vertex[d]}")
        return "\n".join(lines) + "\n"


def glue(t: OuterplanarTriangulation, pi) -> Triangulation2D:
    """Glue the boundary edges of t in pairs according to pi.

    pi may be a NonCrossingPairing or any fixed-point-free involution given
    as a partner array (crossings allowed; the result is then non-planar).
    The n glued edges become the distinguished set E0.
    """
    partner = list(pi.partner) if isinstance(pi, NonCrossingPairing) else list(pi)
    m = t.boundary_size
    if len(partner) != m:
        raise ValueError(f"pairing size {len(partner)} does not match boundary {m}")
    for i, j in enumerate(partner):
        if not 0 <= j < m or j == i or partner[j] != i:
            raise ValueError("pi is not a fixed-point-free involution")

    tris = t.triangles
    n_darts = 3 * len(tris)
    twin = [-1] * n_darts

    # Interior chords appear as two opposite darts among the triangles.
    by_arrow: dict[tuple[int, int], int] = {}
    for f, tri in enumerate(tris):
        for p in range(3):
            by_arrow[(tri[p], tri[(p + 1) % 3])] = 3 * f + p
    boundary_dart = [by_arrow[(k, (k + 1) % m)] for k in range(m)]
    boundary_set = set(boundary_dart)
    for (u, v), d in by_arrow.items():
        if d in boundary_set:
            continue
        twin[d] = by_arrow[(v, u)]

    for i, j in enumerate(partner):
        twin[boundary_dart[i]] = boundary_dart[j]

    # Vertex identifications: heads glue to tails.  Class labels are
    # canonical by first appearance in dart order (matching split()).
    ds = DisjointSets(m)
    for i, j in enumerate(partner):
        if i < j:
            ds.union(i, (j + 1) % m)
            ds.union((i + 1) % m, j)
    labels: dict[int, int] = {}
    vertex = []
    for d in range(n_darts):
        r = ds.find(tris[d // 3][d % 3])
        if r not in labels:
            labels[r] = len(labels)
        vertex.append(labels[r])
    vertex = tuple(vertex)

    n_vertices = ds.components
    e0 = frozenset(boundary_dart[i] for i in range(m))
    return Triangulation2D(
        twin=tuple(twin),
        vertex=vertex,
        n_vertices=n_vertices,
        planar=(n_vertices == t.n + 1),
        e0_darts=e0,
        root_dart=boundary_dart[0],
        position_darts=tuple(boundary_dart),
    )


def unglue_faces(
    tri: Triangulation2D,
) -> tuple[list[tuple[int, int, int]], list[int], list[int]]:
    """Cut a closed planar triangulation open along its spanning tree E0.

    Inverse of glue: walks the contour of E0 starting at the root dart and
    labels the boundary positions 0..2n-1.  Returns the cut triangles in
    face order (as boundary-label dart cycles), the pairing of positions,
    and the contour (the dart realizing each position).  Requires e0_darts
    to be a spanning tree and the root dart to lie on it.
    """
    if tri.root_dart is None or tri.root_dart not in tri.e0_darts:
        raise ValueError("unglue needs a root dart on E0")
    n_b = len(tri.e0_darts)

    # Contour walk: after boundary dart c at position k, rotate around
    # head(c) starting just past twin(c); the non-E0 darts swept are the
    # outgoing darts of the cut vertex b_{k+1}, and the first E0 dart is
    # the boundary dart of position k+1.
    contour = [tri.root_dart]
    sector = [-1] * tri.n_darts
    sector[tri.root_dart] = 0
    c = tri.root_dart
    for k in range(n_b):
        e = tri.rotate(tri.twin[c])
        while e not in tri.e0_darts:
            sector[e] = (k + 1) % n_b
            e = tri.rotate(e)
        if k < n_b - 1:
            sector[e] = k + 1
            contour.append(e)
            c = e
        elif e != tri.root_dart:
            raise ValueError("E0 contour does not close; E0 is not a spanning tree")

    triangles = []
    for f in range(tri.n_faces):
        cyc = (sector[3 * f], sector[3 * f + 1], sector[3 * f + 2])
        if -1 in cyc:
            raise ValueError("unreached corner; E0 does not span the triangulation")
        triangles.append(cyc)

    where = {d: k for k, d in enumerate(contour)}
    partner = [where[tri.twin[d]] for d in contour]
    return triangles, partner, contour


def unglue(tri: Triangulation2D) -> tuple[OuterplanarTriangulation, list[int]]:
    """The (outerplanar triangulation, pairing) pair that glues back to tri."""
    triangles, partner, _ = unglue_faces(tri)
    return OuterplanarTriangulation(len(partner) // 2, tuple(triangles)), partner


# ---------------------------------------------------------------------------
# Hierarchical triangulations
# ---------------------------------------------------------------------------

def companion_pairing(tri: Triangulation2D) -> Optional[dict[int, int]]:
    """The pairing of faces into companions sharing three distinct vertices.

    Returns {face: companion face} covering all faces, or None if some face
    has no companion.  Planarity makes the companion unique, so faces are
    grouped by their vertex-class triple.
    """
    if not tri.planar:
        raise ValueError("companion pairing requires a planar triangulation")
    groups: dict[tuple[int, int, int], list[int]] = {}
    for f in range(tri.n_faces):
        a, b, c = sorted(tri.face_classes(f))
        if a == b or b == c:
            return None
        groups.setdefault((a, b, c), []).append(f)
    pairing: dict[int, int] = {}
    for triple, fs in groups.items():
        if len(fs) != 2:
            return None
        pairing[fs[0]] = fs[1]
        pairing[fs[1]] = fs[0]
    return pairing


def is_hierarchical(tri: Triangulation2D) -> bool:
    return companion_pairing(tri) is not None


def tree_avoids_2cycles(tri: Triangulation2D, pairing: dict[int, int]) -> bool:
    """True iff every E0 edge is shared by two companion faces.

    An edge avoids cycles of length two exactly when its two sides lie in
    paired triangles, which is the form used as the implementation.
    """
    for d in tri.e0_darts:
        if d < tri.twin[d]:
            if pairing.get(tri.face_of(d)) != tri.face_of(tri.twin[d]):
                return False
    return True


def is_in_H(t: OuterplanarTriangulation, pi: NonCrossingPairing) -> bool:
    """Does gluing along pi give a hierarchical triangulation whose
    distinguished spanning tree avoids 2-cycles?"""
    tri = glue(t, pi)
    pairing = companion_pairing(tri)
    return pairing is not None and tree_avoids_2cycles(tri, pairing)


def is_hierarchical_recursive(tri: Triangulation2D) -> bool:
    """Independent hierarchicity test via the recursive construction.

    Repeatedly removes a pair of triangles that share three distinct
    vertices and two edges (the inverse of the pair-insertion move) until
    only the two-triangle base remains.  Works on the face-triple level,
    merging the two surviving parallel edges at each removal.
    """
    # Face list of vertex triples plus, per face, its three edge ids.
    edge_of_dart = [tri.edge_id(d) for d in range(tri.n_darts)]
    faces = {
        f: (tri.face_classes(f), tuple(edge_of_dart[3 * f + p] for p in range(3)))
        for f in range(tri.n_faces)
    }

    def shared_edges(f1, f2):
        return set(faces[f1][1]) & set(faces[f2][1])

    merged = DisjointSets(tri.n_edges * 2)

    while len(faces) > 2:
        found = None
        by_triple: dict[tuple[int, ...], list[int]] = {}
        for f, (cls, _) in faces.items():
            key = tuple(sorted(cls))
            if len(set(key)) == 3:
                by_triple.setdefault(key, []).append(f)
        for fs in by_triple.values():
            if len(fs) != 2:
                continue
            f1, f2 = fs
            if len(shared_edges(f1, f2)) == 2:
                found = (f1, f2)
                break
        if found is None:
            return False
        f1, f2 = found
        shared = shared_edges(f1, f2)
        (e1,) = [e for e in faces[f1][1] if e not in shared]
        (e2,) = [e for e in faces[f2][1] if e not in shared]
        # The two leftover parallel edges fuse into one.
        merged.union(e1, e2)
        del faces[f1], faces[f2]
        faces = {
            f: (cls, tuple(merged.find(e) for e in es)) for f, (cls, es) in faces.items()
        }

    (c1, _), (c2, _) = faces.values()
    return sorted(c1) == sorted(c2) and len(set(c1)) == 3


# ---------------------------------------------------------------------------
# Apollonian triangulations
# ---------------------------------------------------------------------------

def _is_double_triangle(tri_faces: dict[int, tuple[int, int, int]]) -> bool:
    if len(tri_faces) != 2:
        return False
    (c1, c2) = [sorted(c) for c in tri_faces.values()]
    return c1 == c2 and len(set(c1)) == 3


def apollonian_peel(
    tri: Triangulation2D,
) -> Optional[
    tuple[
        list[tuple[int, tuple[int, int, int], tuple[int, int, int], int]],
        dict[int, tuple[int, int, int]],
    ]
]:
    """Degree-3 peel order of an Apollonian triangulation, or None.

    Returns (steps, final faces).  Each step records (center class,
    neighbor classes, removed face ids, created face id) with the removed
    face at slot i lying opposite neighbor i.  Created faces get fresh ids
    above the original count.  Peeling always removes the lowest-numbered
    degree-3 vertex and stops at four vertices (a tetrahedron boundary);
    the two-face double triangle peels to an empty sequence.
    """
    if not tri.planar:
        return None
    faces: dict[int, tuple[int, int, int]] = {
        f: tri.face_classes(f) for f in range(tri.n_faces)
    }
    if _is_double_triangle(faces):
        return [], faces
    # Apollonian triangulations on >= 4 vertices are simple: distinct
    # corners in every face and exactly two face sides per vertex pair.
    incident: dict[tuple[int, int], list[int]] = {}
    for f, cls in faces.items():
        if len(set(cls)) != 3:
            return None
        for i in range(3):
            u, v = cls[i], cls[(i + 1) % 3]
            incident.setdefault((min(u, v), max(u, v)), []).append(f)
    if any(len(fs) != 2 for fs in incident.values()):
        return None

    deg = [0] * tri.n_vertices
    for u, v in incident:
        deg[u] += 1
        deg[v] += 1
    alive_v = tri.n_vertices
    next_face = tri.n_faces
    heap = [v for v in range(tri.n_vertices) if deg[v] == 3]
    heapq.heapify(heap)
    steps = []

    while alive_v > 4:
        while heap and deg[heap[0]] != 3:
            heapq.heappop(heap)
        if not heap:
            return None
        v = heapq.heappop(heap)
        nbrs = sorted(u for (a, b) in incident if v in (a, b) for u in (a, b) if u != v)
        if len(nbrs) != 3:
            return None
        u1, u2, u3 = nbrs
        f_opp = []
        for u, w in ((u2, u3), (u1, u3), (u1, u2)):
            fs = [f for f in incident.get((u, w), []) if v in faces[f]]
            if len(fs) != 1:
                return None
            f_opp.append(fs[0])
        if len(set(f_opp)) != 3:
            return None
        for u in nbrs:
            del incident[(min(u, v), max(u, v))]
            deg[u] -= 1
        new_f = next_face
        next_face += 1
        for (u, w), f_old in (((u2, u3), f_opp[0]), ((u1, u3), f_opp[1]), ((u1, u2), f_opp[2])):
            fs = incident[(u, w)]
            fs.remove(f_old)
            fs.append(new_f)
        for f_old in f_opp:
            del faces[f_old]
        faces[new_f] = (u1, u2, u3)
        deg[v] = 0
        alive_v -= 1
        steps.append((v, (u1, u2, u3), tuple(f_opp), new_f))
        for u in nbrs:
            if deg[u] == 3:
                heapq.heappush(heap, u)

    # Base case: the boundary of a single tetrahedron.
    if len(faces) != 4:
        return None
    corners = set()
    for cls in faces.values():
        corners.update(cls)
    if len(corners) != 4:
        return None
    if {tuple(sorted(c)) for c in faces.values()} != {
        tuple(sorted(corners - {v})) for v in corners
    }:
        return None
    return steps, faces


def is_apollonian(tri: Triangulation2D) -> bool:
    """True iff repeated removal of degree-3 vertices reaches the double
    triangle (equivalently, the map is built by repeated star division)."""
    return apollonian_peel(tri) is not None


def is_in_A(t: OuterplanarTriangulation, pi: NonCrossingPairing) -> bool:
    return is_apollonian(glue(t, pi))


# ---------------------------------------------------------------------------
# Triple trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TripleTree:
    """A validated triple (t, pi_h, pi_a) with its cached meander loop count."""

    t: OuterplanarTriangulation
    pi_h: NonCrossingPairing
    pi_a: NonCrossingPairing
    loops: int

    @property
    def n(self) -> int:
        return self.t.n

    def key(self) -> tuple:
        return (self.t.n, self.t.triangles, self.pi_h.partner, self.pi_a.partner)

    def to_json(self) -> dict:
        return {
            "format": "ttlab/1",
            "n": self.n,
            "t": self.t.dual_tree_string(),
            "pi_h": list(self.pi_h.partner),
            "pi_a": list(self.pi_a.partner),
        }

    @staticmethod
    def from_json(data: dict) -> "TripleTree":
        from .combinatorics import outerplanar_from_string

        t = outerplanar_from_string(int(data["n"]), str(data["t"]))
        pi_h = NonCrossingPairing(t.n, tuple(int(v) for v in data["pi_h"]))
        pi_a = NonCrossingPairing(t.n, tuple(int(v) for v in data["pi_a"]))
        return validate_triple(t, pi_h, pi_a)


def reroot_triple(tt: TripleTree, r: int) -> TripleTree:
    """Move the root so the old boundary position r becomes position 0."""
    m = 2 * tt.n
    t2 = OuterplanarTriangulation(
        tt.n, tuple(tuple((v - r) % m for v in tri) for tri in tt.t.triangles)
    )

    def rot(partner: tuple[int, ...]) -> tuple[int, ...]:
        out = [-1] * m
        for i, j in enumerate(partner):
            out[(i - r) % m] = (j - r) % m
        return tuple(out)

    return validate_triple(
        t2,
        NonCrossingPairing(tt.n, rot(tt.pi_h.partner)),
        NonCrossingPairing(tt.n, rot(tt.pi_a.partner)),
    )


def mirror_triple(tt: TripleTree) -> TripleTree:
    """Reflect the polygon: position k goes to 2n-1-k."""
    m = 2 * tt.n
    t2 = OuterplanarTriangulation(
        tt.n, tuple(tuple((-v) % m for v in reversed(tri)) for tri in tt.t.triangles)
    )

    def ref(partner: tuple[int, ...]) -> tuple[int, ...]:
        out = [-1] * m
        for i, j in enumerate(partner):
            out[m - 1 - i] = m - 1 - j
        return tuple(out)

    return validate_triple(
        t2,
        NonCrossingPairing(tt.n, ref(tt.pi_h.partner)),
        NonCrossingPairing(tt.n, ref(tt.pi_a.partner)),
    )


def validate_triple(
    t: OuterplanarTriangulation, pi_h: NonCrossingPairing, pi_a: NonCrossingPairing
) -> TripleTree:
    """Build a TripleTree, raising TripleRejected with the failing condition."""
    if pi_h.n != t.n or pi_a.n != t.n:
        raise TripleRejected(TripleRejected.SIZE_MISMATCH)
    h = glue(t, pi_h)
    pairing = companion_pairing(h)
    if pairing is None:
        raise TripleRejected(TripleRejected.NOT_HIERARCHICAL)
    if not tree_avoids_2cycles(h, pairing):
        raise TripleRejected(TripleRejected.TREE_EDGE_IN_2CYCLE)
    if not is_apollonian(glue(t, pi_a)):
        raise TripleRejected(TripleRejected.NOT_APOLLONIAN)
    return TripleTree(t, pi_h, pi_a, loop_count(pi_h, pi_a))
