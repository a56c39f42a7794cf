"""Topology certificates: local constructions, collapses, Morse gradients.

A closed triangulation built from a tree of tetrahedra by repeatedly gluing
two adjacent boundary triangles is locally constructible; if every gluing
respects a distinguished spanning edge set (one shared edge free, identified
edges of matching type) the construction is tree-avoiding and certifies the
3-sphere.  The same data reads as a collapsing sequence of the 2-complex
T^{T0} onto the critical tree E, and as the middle layer of a discrete Morse
gradient with exactly two critical simplices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .combinatorics import DisjointSets, NonCrossingPairing, OuterplanarTriangulation
from .complexes import (
    EmbeddedComplex2,
    T0Complex,
    Triangulation3D,
    complex_from_t0,
    cut_along,
    verify_membership,
)
from .planar import Triangulation2D


class LocalConstructionError(Exception):
    """A replayed gluing step is invalid; .reason carries the cause."""

    NON_ADJACENT = "NonAdjacentPair"
    INADMISSIBLE = "InadmissibleStep"
    NON_EMPTY_BOUNDARY = "NonEmptyBoundary"

    def __init__(self, reason: str, step: int = -1):
        super().__init__(f"{reason} at step {step}" if step >= 0 else reason)
        self.reason = reason
        self.step = step


# ---------------------------------------------------------------------------
# Mutable boundary state shared by the gluing and reduction replays
# ---------------------------------------------------------------------------

class BoundaryState:
    """Boundary surface of a partially glued triangulation.

    Triangles are indexed 0..n-1 with slots 3i+p; partner is the current
    edge pairing (-1 marks an unglued slot, used by the map-level reduction
    replay where cut edges are the boundary of the shrinking map).  The
    distinguished flag is carried per slot and is kept equal on the two
    slots of every edge.
    """

    def __init__(self, n_triangles: int, partner: list[int], dist: set[int]):
        self.partner = list(partner)
        self.alive = set(range(n_triangles))
        self.dist = [s in dist for s in range(3 * n_triangles)]
        self.corners = DisjointSets(3 * n_triangles)
        for s, u in enumerate(self.partner):
            if u >= 0:
                self._merge_endpoints(s, u)
        self.dangling = 0

    def _merge_endpoints(self, s: int, u: int) -> None:
        f, p = s // 3, s % 3
        g, q = u // 3, u % 3
        self.corners.union(3 * f + p, 3 * g + (q + 1) % 3)
        self.corners.union(3 * f + (p + 1) % 3, 3 * g + q)

    def slots_of(self, tri: int) -> tuple[int, int, int]:
        return (3 * tri, 3 * tri + 1, 3 * tri + 2)

    def shared_edges(self, a: int, b: int) -> list[int]:
        """Slots of triangle a currently glued to triangle b."""
        return [s for s in self.slots_of(a) if self.partner[s] // 3 == b and self.partner[s] >= 0]

    def classify(self, a: int, b: int, check_avoid: bool) -> tuple[Optional[int], str, str]:
        """Classify the pair for gluing: (sigma slot, case tag, failure).

        With check_avoid the distinguished-set rules are enforced: exactly
        the shared non-distinguished edge may be folded over (component
        closings excepted) and genuinely identified edges must have equal
        flags.  Without it any shared edge works and the tag is "-".
        """
        if a == b or a not in self.alive or b not in self.alive:
            return None, "-", LocalConstructionError.NON_ADJACENT
        shared = self.shared_edges(a, b)
        if not shared:
            return None, "-", LocalConstructionError.NON_ADJACENT
        if not check_avoid:
            return shared[0], "-", ""
        free = [s for s in shared if not self.dist[s]]
        if not free:
            return None, "-", LocalConstructionError.INADMISSIBLE
        closing = len(shared) == 3
        if len(free) > 1 and not closing:
            return None, "-", LocalConstructionError.INADMISSIBLE
        sigma = min(free)
        # Identified pairs must match in type.
        p, q = sigma % 3, self.partner[sigma] % 3
        flags = []
        for d in (1, 2):
            x = 3 * a + (p + d) % 3
            y = 3 * b + (q - d) % 3
            if self.partner[x] == y:
                continue  # already shared; handled by the rules above
            if self.dist[x] != self.dist[y]:
                return None, "-", LocalConstructionError.INADMISSIBLE
            flags.append(self.dist[x])
        if closing:
            n_dist = sum(1 for s in shared if self.dist[s])
            tag = "f" if n_dist == 2 else "h"
        elif len(shared) == 2:
            tag = "e" if (flags and flags[0]) else "d"
        else:
            if not any(flags):
                tag = "a"
            elif all(flags):
                corner_classes = {
                    self.corners.find(3 * t + c) for t in (a, b) for c in range(3)
                }
                tag = "c" if len(corner_classes) >= 4 else "g"
            else:
                tag = "b"
        return sigma, tag, ""

    def fold(
        self, a: int, b: int, sigma: int, check_avoid: bool, step: int = -1
    ) -> tuple[dict[int, int], str]:
        """Glue triangles a and b along the shared edge at slot sigma.

        Returns the slot bijection used (a-slot -> b-slot) and the case tag.
        The three slot pairs are anchored at sigma and reverse the cyclic
        order; neighbors of genuinely identified edges are re-attached to
        each other, chained identifications included.
        """
        expected_sigma, tag, failure = self.classify(a, b, check_avoid)
        if failure:
            raise LocalConstructionError(failure, step)
        if self.partner[sigma] < 0 or self.partner[sigma] // 3 != b or sigma // 3 != a:
            raise LocalConstructionError(LocalConstructionError.NON_ADJACENT, step)
        if check_avoid:
            if self.dist[sigma]:
                raise LocalConstructionError(LocalConstructionError.INADMISSIBLE, step)
        p, q = sigma % 3, self.partner[sigma] % 3
        iota = {}
        for d in range(3):
            x, y = 3 * a + (p + d) % 3, 3 * b + (q - d) % 3
            iota[x] = y
            iota[y] = x
        # Type matching outside avoid mode still requires boundary slots to
        # meet boundary slots (the map-level replay depends on it).
        for x, y in iota.items():
            if (self.partner[x] < 0) != (self.partner[y] < 0):
                raise LocalConstructionError(LocalConstructionError.INADMISSIBLE, step)

        for d in range(3):
            x = 3 * a + (p + d) % 3
            self._merge_endpoints(x, iota[x])

        dying = set(iota)
        for x, y in list(iota.items()):
            if x > y:
                continue
            if self.partner[x] == y:
                continue  # shared edge closes into the interior
            if self.partner[x] < 0:
                self.dangling += 1  # two boundary edges fuse into a bare edge
        for s in list(dying):
            out = self.partner[s]
            if out < 0 or out in dying:
                continue
            # Walk the identification chain to the surviving far side.
            cur = s
            while True:
                cur = iota[cur]
                far = self.partner[cur]
                if far < 0:
                    raise LocalConstructionError(LocalConstructionError.INADMISSIBLE, step)
                if far not in dying:
                    break
                cur = far
            self.partner[out] = far
            self.partner[far] = out
        for s in dying:
            self.partner[s] = -2
        self.alive.discard(a)
        self.alive.discard(b)
        return iota, tag


# ---------------------------------------------------------------------------
# Local constructions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalConstruction:
    """A certified gluing order for rebuilding T from its tree of tetrahedra.

    Steps are (side of A, side of B, sigma slot, case tag) where sides are
    (tetra, face) pairs of the base tree and sigma is a slot of the frozen
    boundary bundle below.  avoided_slots is the preimage of the critical
    tree on the boundary of the base tree (empty for a plain construction).
    """

    base: T0Complex
    t0_gluings: dict[tuple[int, int], tuple[int, int, tuple[int, int, int]]]
    t0_faces: frozenset[frozenset[tuple[int, int]]]
    n_tetrahedra: int
    root: tuple[int, int, tuple[int, int]]
    steps: tuple[tuple[tuple[int, int], tuple[int, int], int, str], ...]
    avoided_slots: frozenset[int]

    def to_json(self) -> dict:
        return {
            "format": "ttlab/1",
            "steps": [
                {
                    "a": list(a),
                    "b": list(b),
                    "sigma": [*self.base.sides[s // 3], s % 3],
                    "case": tag,
                }
                for a, b, s, tag in self.steps
            ],
            "avoided": sorted(
                [*self.base.sides[s // 3], s % 3] for s in self.avoided_slots
            ),
        }


def _base_state(lc: LocalConstruction, avoid: bool) -> BoundaryState:
    b = lc.base
    dist = set(lc.avoided_slots) if avoid else set()
    return BoundaryState(
        n_triangles=len(b.sides), partner=list(b.complex.pi_c), dist=dist
    )


def run_local_construction(
    lc: LocalConstruction, avoid: bool = True
) -> Triangulation3D:
    """Replay the gluing steps; returns the closed decorated triangulation.

    With avoid=True every step must be admissible for the avoided spanning
    set; with avoid=False the same steps are executed under the plain
    local-construction rules.
    """
    b = lc.base
    state = _base_state(lc, avoid)
    side_index = {s: k for k, s in enumerate(b.sides)}
    gluings = dict(lc.t0_gluings)
    for step_no, (side_a, side_b, sigma, _) in enumerate(lc.steps):
        ia, ib = side_index[side_a], side_index[side_b]
        iota, _tag = state.fold(ia, ib, sigma, check_avoid=avoid, step=step_no)
        cyc_a, cyc_b = b.cycles[ia], b.cycles[ib]
        corr = {}
        for p in range(3):
            q = iota[3 * ia + p] % 3
            corr[cyc_a[p]] = cyc_b[(q + 1) % 3]
        (ta, fa), (tb, fb) = side_a, side_b
        perm = tuple(corr[v] for v in Triangulation3D._face_locals(fa))
        inv = {v: k for k, v in corr.items()}
        perm_back = tuple(inv[v] for v in Triangulation3D._face_locals(fb))
        gluings[side_a] = (tb, fb, perm)
        gluings[side_b] = (ta, fa, perm_back)
    if state.alive:
        raise LocalConstructionError(LocalConstructionError.NON_EMPTY_BOUNDARY)

    raw_e_keys = set()
    for s in lc.avoided_slots:
        i, f = b.sides[s // 3]
        cyc = b.cycles[s // 3]
        u, v = cyc[s % 3], cyc[(s % 3 + 1) % 3]
        raw_e_keys.add((i, min(u, v), max(u, v)))
    draft = Triangulation3D(
        n_tetrahedra=lc.n_tetrahedra,
        gluings=gluings,
        t0_faces=lc.t0_faces,
        e_edges=frozenset(raw_e_keys),
        root=lc.root,
    )
    if not raw_e_keys:
        return draft
    from .complexes import _canonical_e_keys

    return Triangulation3D(
        n_tetrahedra=draft.n_tetrahedra,
        gluings=draft.gluings,
        t0_faces=draft.t0_faces,
        e_edges=_canonical_e_keys(draft, raw_e_keys),
        root=draft.root,
    )


def admissible_pairs(
    state: BoundaryState,
) -> list[tuple[int, int, int, str]]:
    """All currently admissible gluing pairs as (A, B, sigma slot, tag)."""
    out = []
    alive = sorted(state.alive)
    for i, a in enumerate(alive):
        for b in alive[i + 1:]:
            sigma, tag, failure = state.classify(a, b, check_avoid=True)
            if not failure:
                out.append((a, b, sigma, tag))
    return out


def boundary_state_of(
    tri: Triangulation2D, e_darts: frozenset[int]
) -> BoundaryState:
    """Adapter: boundary state of a closed 2D triangulation with a
    distinguished edge set (darts of the half-edge structure)."""
    return BoundaryState(
        n_triangles=tri.n_faces, partner=list(tri.twin), dist=set(e_darts)
    )


# ---------------------------------------------------------------------------
# Collapsing sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollapsingSequence:
    """Ordered elementary collapses (free edge id, triangle id) on a complex."""

    complex: EmbeddedComplex2
    steps: tuple[tuple[int, int], ...]


def _greedy_collapse(
    c: EmbeddedComplex2, protected: frozenset[int], reverse_ties: bool = False
) -> Optional[list[tuple[int, int]]]:
    """Collapse all triangles, never removing a protected edge.

    Picks the smallest (largest with reverse_ties) free unprotected edge at
    every step; returns None when stuck before all triangles are gone.
    """
    tri_edges: dict[int, list[int]] = {}
    for f in range(c.n_oriented):
        if c.pi_t[3 * f] // 3 < f:
            continue
        tid = c.triangle_pair_id[f]
        tri_edges[tid] = [c.edge_of_slot[3 * f + p] for p in range(3)]
    incidence: dict[int, set[int]] = {e: set() for e in range(c.n_edges)}
    count: dict[int, int] = {e: 0 for e in range(c.n_edges)}
    for tid, es in tri_edges.items():
        for e in es:
            incidence[e].add(tid)
            count[e] += 1
    steps = []
    live = set(tri_edges)
    while live:
        candidates = [
            e
            for e, k in count.items()
            if k == 1 and e not in protected and incidence[e]
        ]
        if not candidates:
            return None
        e = max(candidates) if reverse_ties else min(candidates)
        (tid,) = incidence[e]
        steps.append((e, tid))
        for e2 in tri_edges[tid]:
            count[e2] -= 1
            incidence[e2].discard(tid)
        count[e] = 0
        live.discard(tid)
    return steps


def collapse_tree_of_triangles(
    c: EmbeddedComplex2, e_prime: frozenset[int]
) -> CollapsingSequence:
    """Collapse a tree of triangles onto a spanning tree of free edges."""
    if not c.is_tree_of_triangles():
        raise ValueError("complex is not a tree of triangles")
    if not e_prime <= c.free_edges:
        raise ValueError("target edges must be free")
    ds = DisjointSets(c.n_vertices)
    for e in e_prime:
        u, v = c.edge_endpoints(e)
        if not ds.union(u, v):
            raise ValueError("target edge set contains a cycle")
    if ds.components != 1:
        raise ValueError("target edge set does not span the complex")
    steps = _greedy_collapse(c, frozenset(e_prime))
    if steps is None:
        raise AssertionError("a tree of triangles always collapses onto a spanning free tree")
    return CollapsingSequence(complex=c, steps=tuple(steps))


# ---------------------------------------------------------------------------
# Certificates for decorated triangulations
# ---------------------------------------------------------------------------

def _lc_from_collapse_steps(
    tri3: Triangulation3D,
    bundle: T0Complex,
    steps: list[tuple[int, int]],
) -> LocalConstruction:
    c = bundle.complex
    pair_sides: dict[int, tuple[int, int]] = {}
    for f in range(c.n_oriented):
        g = c.pi_t[3 * f] // 3
        if g < f:
            continue
        pair_sides[c.triangle_pair_id[f]] = (f, g)
    lc_steps = []
    for edge, tid in steps:
        f, g = pair_sides[tid]
        sigma = min(s for s in (3 * f, 3 * f + 1, 3 * f + 2) if c.edge_of_slot[s] == edge)
        lc_steps.append((bundle.sides[f], bundle.sides[g], sigma, "?"))
    t0_gluings = {
        side: tri3.gluings[side]
        for pair in tri3.t0_faces
        for side in pair
    }
    lc = LocalConstruction(
        base=bundle,
        t0_gluings=t0_gluings,
        t0_faces=tri3.t0_faces,
        n_tetrahedra=tri3.n_tetrahedra,
        root=tri3.root,
        steps=tuple(lc_steps),
        avoided_slots=bundle.e_slots,
    )
    # Replay once to fill in the case tags.
    state = _base_state(lc, avoid=True)
    side_index = {s: k for k, s in enumerate(bundle.sides)}
    tagged = []
    for step_no, (sa, sb, sigma, _) in enumerate(lc.steps):
        _, tag = state.fold(
            side_index[sa], side_index[sb], sigma, check_avoid=True, step=step_no
        )
        tagged.append((sa, sb, sigma, tag))
    return LocalConstruction(
        base=lc.base,
        t0_gluings=lc.t0_gluings,
        t0_faces=lc.t0_faces,
        n_tetrahedra=lc.n_tetrahedra,
        root=lc.root,
        steps=tuple(tagged),
        avoided_slots=lc.avoided_slots,
    )


def find_tree_avoiding_lc(
    tri3: Triangulation3D, reverse_ties: bool = False
) -> Optional[LocalConstruction]:
    """A tree-avoiding local construction of T based on T0 with critical
    tree E, or None when the membership conditions fail.

    The certificate is the greedy collapse of T^{T0}_E onto Cut(E), lifted
    back to gluing steps; reverse_ties flips the deterministic tie-break.
    """
    ok, _ = verify_membership(tri3)
    if not ok:
        return None
    bundle = complex_from_t0(tri3)
    cls_to_complex = bundle.complex_edge_of_class()
    e_complex = {cls_to_complex[cl] for cl in tri3.e_edge_ids()}
    cut_c, cut_ids = cut_along(bundle.complex, e_complex)
    steps_cut = _greedy_collapse(cut_c, frozenset(cut_ids), reverse_ties=reverse_ties)
    if steps_cut is None:
        return None
    # Map edges of the cut complex back to edges of T^{T0}: slots agree.
    slot_of_cut_edge = {}
    for s in range(cut_c.n_slots):
        slot_of_cut_edge.setdefault(cut_c.edge_of_slot[s], s)
    steps = [
        (bundle.complex.edge_of_slot[slot_of_cut_edge[e]], tid) for e, tid in steps_cut
    ]
    return _lc_from_collapse_steps(tri3, bundle, steps)


def lc_to_collapse(lc: LocalConstruction) -> CollapsingSequence:
    """The collapsing sequence of T^{T0} onto E defined by the gluing order."""
    c = lc.base.complex
    steps = tuple(
        (c.edge_of_slot[sigma], c.triangle_pair_id[sigma // 3])
        for _, _, sigma, _ in lc.steps
    )
    return CollapsingSequence(complex=c, steps=steps)


def collapse_to_lc(
    cs: CollapsingSequence, tri3: Triangulation3D
) -> LocalConstruction:
    """Inverse of lc_to_collapse for collapses of T^{T0} onto E."""
    bundle = complex_from_t0(tri3)
    if bundle.complex.pi_t != cs.complex.pi_t or bundle.complex.pi_c != cs.complex.pi_c:
        raise ValueError("collapse does not live on T^{T0} of this triangulation")
    return _lc_from_collapse_steps(tri3, bundle, list(cs.steps))


# ---------------------------------------------------------------------------
# Reduction sequences on outerplanar triangulations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionSequence:
    """An ordered triangle pairing reducing an outerplanar triangulation.

    pairing maps each triangle index of t0 to its partner; order lists the
    pairs (as (a, b) with a < b) in the order they are glued.
    """

    t0: OuterplanarTriangulation
    pairing: tuple[int, ...]
    order: tuple[tuple[int, int], ...]


def _map_state(t0: OuterplanarTriangulation) -> BoundaryState:
    m = t0.boundary_size
    tris = t0.triangles
    by_arrow = {}
    for f, tri in enumerate(tris):
        for p in range(3):
            by_arrow[(tri[p], tri[(p + 1) % 3])] = 3 * f + p
    partner = [-1] * (3 * len(tris))
    boundary = {by_arrow[(k, (k + 1) % m)] for k in range(m)}
    for (u, v), s in by_arrow.items():
        if s not in boundary:
            partner[s] = by_arrow[(v, u)]
    return BoundaryState(n_triangles=len(tris), partner=partner, dist=set())


def reduction_sequence_check(rs: ReductionSequence) -> bool:
    """Validate admissibility on the shrinking map and replay the surgeries."""
    n = len(rs.t0.triangles) // 2
    if sorted(x for pair in rs.order for x in pair) != list(
        range(len(rs.t0.triangles))
    ):
        return False
    for a, b in rs.order:
        if rs.pairing[a] != b or rs.pairing[b] != a:
            return False
    state = _map_state(rs.t0)
    for a, b in rs.order:
        shared = [
            s for s in state.slots_of(a) if state.partner[s] >= 0 and state.partner[s] // 3 == b
        ]
        if len(shared) != 1:
            return False
        n_bound_a = sum(1 for s in state.slots_of(a) if state.partner[s] == -1)
        n_bound_b = sum(1 for s in state.slots_of(b) if state.partner[s] == -1)
        if n_bound_a != n_bound_b or n_bound_a > 2:
            return False
        try:
            state.fold(a, b, shared[0], check_avoid=False, step=-1)
        except LocalConstructionError:
            return False
    return not state.alive


def pi_h_from_reduction(rs: ReductionSequence) -> NonCrossingPairing:
    """The non-crossing pairing of the boundary edges carried by a valid
    reduction sequence; gluing t0 along it is hierarchical."""
    state = _map_state(rs.t0)
    incidence = rs.t0.boundary_incidence()
    slot_of_pos = {k: 3 * f + p for k, (f, p) in enumerate(incidence)}
    pos_of_slot = {s: k for k, s in slot_of_pos.items()}
    partner = [-1] * rs.t0.boundary_size
    for a, b in rs.order:
        shared = [
            s for s in state.slots_of(a) if state.partner[s] >= 0 and state.partner[s] // 3 == b
        ]
        if len(shared) != 1:
            raise ValueError("invalid reduction sequence")
        was_boundary = {
            s for s in state.slots_of(a) + state.slots_of(b) if state.partner[s] == -1
        }
        iota, _ = state.fold(a, b, shared[0], check_avoid=False)
        for x, y in iota.items():
            if x < y and x in was_boundary and y in was_boundary:
                px, py = pos_of_slot[x], pos_of_slot[y]
                partner[px], partner[py] = py, px
    if state.alive or -1 in partner:
        raise ValueError("invalid reduction sequence")
    return NonCrossingPairing(rs.t0.n, tuple(partner))


def reduction_from_lc(lc: LocalConstruction) -> ReductionSequence:
    """Reduction sequence induced by a certificate on the cut polygon.

    Cutting the base boundary along the avoided tree recovers the
    outerplanar triangulation; the gluing order projects onto its triangle
    pairs.
    """
    from dataclasses import replace

    from .planar import unglue_faces

    b = lc.base
    surface = b.complex.split()
    surface = replace(surface, e0_darts=lc.avoided_slots, root_dart=b.root_slot)
    faces, partner, _ = unglue_faces(surface)
    t0 = OuterplanarTriangulation(len(partner) // 2, tuple(faces))

    def norm(tri):
        k = tri.index(min(tri))
        return (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3])

    face_of_side = {
        side: t0.triangles.index(norm(faces[k])) for k, side in enumerate(b.sides)
    }
    pairing = [-1] * len(t0.triangles)
    order = []
    for sa, sb, _, _ in lc.steps:
        fa, fb = face_of_side[sa], face_of_side[sb]
        pairing[fa], pairing[fb] = fb, fa
        order.append((min(fa, fb), max(fa, fb)))
    return ReductionSequence(t0=t0, pairing=tuple(pairing), order=tuple(order))


# ---------------------------------------------------------------------------
# Discrete Morse gradients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteVectorField:
    """Pairs (k-simplex, (k+1)-cofacet) plus facet data for walk checks.

    Simplices are identified by (dim, id): vertex and edge ids are the class
    ids of the parent triangulation; triangle ids enumerate the complex
    triangles of T^{T0} first and then the internal triangles of T0;
    tetrahedra use their own indices.
    """

    pairs: tuple[tuple[int, int, int], ...]  # (dim of simplex, simplex, cofacet)
    critical: frozenset[tuple[int, int]]
    facets: dict[tuple[int, int], tuple[int, ...]]  # (dim, id) -> facet ids

    def pair_map(self, dim: int) -> dict[int, int]:
        return {s: cof for d, s, cof in self.pairs if d == dim}

    def to_json(self) -> dict:
        return {
            "format": "ttlab/1",
            "pairs": [list(p) for p in self.pairs],
            "critical": sorted(list(c) for c in self.critical),
        }


def is_acyclic(dvf: DiscreteVectorField) -> bool:
    """No closed walks; cycles necessarily alternate between two layers."""
    for dim in (0, 1, 2):
        paired = dvf.pair_map(dim)
        graph: dict[int, list[int]] = {}
        for s, cof in paired.items():
            nbrs = [
                z
                for z in dvf.facets[(dim + 1, cof)]
                if z != s and z in paired
            ]
            graph[s] = nbrs
        color: dict[int, int] = {}

        def dfs(u: int) -> bool:
            color[u] = 1
            for v in graph.get(u, ()):
                if color.get(v) == 1:
                    return False
                if color.get(v) is None and not dfs(v):
                    return False
            color[u] = 2
            return True

        for u in graph:
            if color.get(u) is None and not dfs(u):
                return False
    return True


def _simplex_inventory(
    tri3: Triangulation3D, bundle: T0Complex
) -> tuple[dict[tuple[int, int], tuple[int, ...]], dict[frozenset, int], int]:
    """Facet table for all simplices of T, plus internal-triangle ids."""
    facets: dict[tuple[int, int], tuple[int, ...]] = {}
    vc = tri3.vertex_classes
    for key, cls in tri3.edge_classes.items():
        i, a, b = key
        cur = facets.get((1, cls))
        facets[(1, cls)] = (vc[(i, a)], vc[(i, b)])
    c = bundle.complex
    n_complex = c.n_triangles
    for f in range(c.n_oriented):
        tid = c.triangle_pair_id[f]
        facets[(2, tid)] = tuple(
            bundle.edge_class_of_slot[3 * f + p] for p in range(3)
        )
    internal_ids: dict[frozenset, int] = {}
    pairs_sorted = sorted(tri3.t0_faces, key=lambda p: sorted(p))
    locs = Triangulation3D._face_locals
    for k, pair in enumerate(pairs_sorted):
        tid = n_complex + k
        internal_ids[pair] = tid
        (i, f) = min(pair)
        es = []
        vlist = locs(f)
        for x in range(3):
            a, b = vlist[x], vlist[(x + 1) % 3]
            es.append(tri3.edge_classes[(i, min(a, b), max(a, b))])
        facets[(2, tid)] = tuple(es)
    side_tid: dict[tuple[int, int], int] = {}
    for f, side in enumerate(bundle.sides):
        side_tid[side] = c.triangle_pair_id[f]
    for pair, tid in internal_ids.items():
        for side in pair:
            side_tid[side] = tid
    for i in range(tri3.n_tetrahedra):
        facets[(3, i)] = tuple(side_tid[(i, f)] for f in range(4))
    return facets, internal_ids, n_complex


def morse_from_lc(lc: LocalConstruction, tri3: Triangulation3D) -> DiscreteVectorField:
    """The full Morse gradient carried by a tree-avoiding construction.

    Middle layer: the collapse pairs (sigma, Sigma).  Bottom: every vertex
    but the root-edge tail is oriented along E toward it.  Top: every
    internal triangle of T0 is oriented toward the tetrahedron away from
    the root side, leaving one critical vertex and one critical tetrahedron.
    """
    bundle = complex_from_t0(tri3)
    facets, internal_ids, _ = _simplex_inventory(tri3, bundle)
    c = bundle.complex
    pairs: list[tuple[int, int, int]] = []

    for _, _, sigma, _ in lc.steps:
        pairs.append(
            (1, bundle.edge_class_of_slot[sigma], c.triangle_pair_id[sigma // 3])
        )

    # Bottom layer: orient the spanning edge tree toward the critical vertex.
    vc = tri3.vertex_classes
    ri, rf, (ra, rb) = tri3.root
    critical_vertex = vc[(ri, ra)]
    adj: dict[int, list[tuple[int, int]]] = {}
    for key in tri3.e_edges:
        i, a, b = key
        cls = tri3.edge_classes[key]
        u, v = vc[(i, a)], vc[(i, b)]
        adj.setdefault(u, []).append((v, cls))
        adj.setdefault(v, []).append((u, cls))
    seen = {critical_vertex}
    queue = [critical_vertex]
    while queue:
        u = queue.pop(0)
        for v, cls in sorted(adj.get(u, ())):
            if v not in seen:
                seen.add(v)
                pairs.append((0, v, cls))
                queue.append(v)

    # Top layer: orient the dual tree of T0 toward the critical tetrahedron.
    critical_tetra = ri
    tadj: dict[int, list[tuple[int, frozenset]]] = {}
    for pair in tri3.t0_faces:
        (i, _), (j, _) = tuple(pair)
        tadj.setdefault(i, []).append((j, pair))
        tadj.setdefault(j, []).append((i, pair))
    seen_t = {critical_tetra}
    queue = [critical_tetra]
    while queue:
        u = queue.pop(0)
        for v, pair in sorted(tadj.get(u, ()), key=lambda x: x[0]):
            if v not in seen_t:
                seen_t.add(v)
                pairs.append((2, internal_ids[pair], v))
                queue.append(v)

    paired = {(d, s) for d, s, _ in pairs} | {(d + 1, cof) for d, _, cof in pairs}
    all_simplices = set(facets) | {(0, v) for v in range(tri3.n_vertices)}
    critical = frozenset(all_simplices - paired)
    return DiscreteVectorField(
        pairs=tuple(pairs), critical=critical, facets=facets
    )


def morse_middle_layer(
    c: EmbeddedComplex2, e: frozenset[int], reverse_ties: bool = False
) -> Optional[frozenset[tuple[int, int]]]:
    """The unique gradient on a complex whose critical simplices are the
    vertices and the edges of e, as (edge, triangle) pairs; None if no such
    gradient exists.  Any peel order returns the same field."""
    steps = _greedy_collapse(c, frozenset(e), reverse_ties=reverse_ties)
    if steps is None:
        return None
    leftover = set(range(c.n_edges)) - set(e) - {edge for edge, _ in steps}
    if leftover:
        return None
    return frozenset(steps)


def morse_uniqueness(
    c: EmbeddedComplex2, e: frozenset[int]
) -> Optional[DiscreteVectorField]:
    """Greedy free-edge peeling; returns the gradient on the complex with
    critical simplices the vertices and the edges of e, or None."""
    field = morse_middle_layer(c, e)
    if field is None:
        return None
    facets: dict[tuple[int, int], tuple[int, ...]] = {}
    verts = c.vertex_of_corner
    for eid in range(c.n_edges):
        facets[(1, eid)] = c.edge_endpoints(eid)
    for f in range(c.n_oriented):
        if c.pi_t[3 * f] // 3 < f:
            continue
        facets[(2, c.triangle_pair_id[f])] = tuple(
            c.edge_of_slot[3 * f + p] for p in range(3)
        )
    critical = frozenset(
        {(0, v) for v in range(c.n_vertices)} | {(1, eid) for eid in e}
    )
    return DiscreteVectorField(
        pairs=tuple((1, edge, tid) for edge, tid in sorted(field)),
        critical=critical,
        facets=facets,
    )
