"""Exact enumeration of triple trees and the generating-function toolkit.

The bivariate counts M_n(x) are computed by a per-map factorization: for
every outerplanar triangulation the valid hierarchical pairings are listed
first (most maps admit none and are skipped), then the valid Apollonian
pairings, and the meander loop count is accumulated over the cross product.
Both pairing scans are pruned backtracking over non-crossing arcs; the two
slow recognizers from the planar module serve as their oracles in tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .combinatorics import (
    BivariatePolynomial,
    NonCrossingPairing,
    OuterplanarTriangulation,
    TruncatedSeries,
    catalan,
    enumerate_outerplanar,
)
from .meander import loop_count
from .planar import TripleTree, companion_pairing, glue, validate_triple

DEFAULT_CAP = 7
EXTENDED_CAP = 8


class EnumerationCapExceeded(Exception):
    pass


@dataclass
class EnumerationReport:
    """Exact counts for one size, with scan statistics."""

    n: int
    coefficients: dict[int, int]  # x-power -> count
    maps_scanned: int = 0
    maps_with_h: int = 0
    h_candidates: int = 0
    a_candidates: int = 0
    triples: int = 0
    rejections: dict[str, int] = field(default_factory=dict)
    seconds: float = 0.0

    def polynomial(self) -> BivariatePolynomial:
        return BivariatePolynomial({(self.n, k): v for k, v in self.coefficients.items()})

    def total(self) -> int:
        return sum(self.coefficients.values())

    def to_json(self) -> dict:
        return {
            "format": "ttlab/1",
            "n": self.n,
            "coefficients": [
                {"x_power": k, "count": v} for k, v in sorted(self.coefficients.items())
            ],
            "total": self.total(),
            "maps_scanned": self.maps_scanned,
            "maps_with_h": self.maps_with_h,
            "h_candidates": self.h_candidates,
            "a_candidates": self.a_candidates,
            "rejections": dict(sorted(self.rejections.items())),
            "seconds": round(self.seconds, 3),
        }


def _map_arrays(t: OuterplanarTriangulation) -> tuple[list[int], list[tuple[int, int, int]]]:
    """(triangle index per boundary position, triangle vertex triples)."""
    tri_of_pos = [f for f, _ in t.boundary_incidence()]
    return tri_of_pos, list(t.triangles)


def _h_pairings(m: int, tri_of_pos: list[int], tris: list[tuple[int, int, int]]):
    """Valid hierarchical pairings of a cut map, as partner arrays.

    A glued edge avoids 2-cycles exactly when its two triangles are
    companions, so the arcs must induce a partial perfect matching of the
    triangles; that constraint prunes the arc search.  At a leaf the vertex
    classes decide companionship: every triangle needs three distinct
    classes and exactly one partner with the same class triple.
    """
    partner = [-1] * m
    match: dict[int, int] = {}
    out = []

    def leaf() -> bool:
        parent = list(range(m))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in enumerate(partner):
            if i < j:
                for a, b in ((i, (j + 1) % m), ((i + 1) % m, j)):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[rb] = ra
        triples = []
        for u, v, w in tris:
            a, b, c = sorted((find(u), find(v), find(w)))
            if a == b or b == c:
                return False
            triples.append((a, b, c))
        counts: dict[tuple[int, int, int], int] = {}
        for tr in triples:
            counts[tr] = counts.get(tr, 0) + 1
        if any(v != 2 for v in counts.values()):
            return False
        for f, g in match.items():
            if f < g and triples[f] != triples[g]:
                return False
        return True

    def rec(pos: int, stack: list[int]):
        if pos == m:
            if leaf():
                out.append(tuple(partner))
            return
        if stack:
            q = stack[-1]
            tq, tp = tri_of_pos[q], tri_of_pos[pos]
            if tq != tp:
                mq = match.get(tq)
                if mq is None and tp not in match:
                    match[tq] = tp
                    match[tp] = tq
                    partner[q], partner[pos] = pos, q
                    stack.pop()
                    rec(pos + 1, stack)
                    stack.append(q)
                    partner[q] = partner[pos] = -1
                    del match[tq], match[tp]
                elif mq == tp:
                    partner[q], partner[pos] = pos, q
                    stack.pop()
                    rec(pos + 1, stack)
                    stack.append(q)
                    partner[q] = partner[pos] = -1
        if m - pos - 1 > len(stack):
            stack.append(pos)
            rec(pos + 1, stack)
            stack.pop()

    rec(0, [])
    return out


def _is_apollonian_triples(triples: list[tuple[int, int, int]], n_classes: int) -> bool:
    """Degree-3 peeling on face class triples (simple triangulations only;
    callers reject non-simple gluings first)."""
    incident: dict[tuple[int, int], list[int]] = {}
    faces = dict(enumerate(triples))
    for f, cls in faces.items():
        for i in range(3):
            u, v = cls[i], cls[(i + 1) % 3]
            key = (u, v) if u < v else (v, u)
            incident.setdefault(key, []).append(f)
    if any(len(fs) != 2 for fs in incident.values()):
        return False
    deg = [0] * n_classes
    for u, v in incident:
        deg[u] += 1
        deg[v] += 1
    alive = n_classes
    stack = [v for v in range(n_classes) if deg[v] == 3]
    next_face = len(triples)
    while alive > 4:
        while stack and deg[stack[-1]] != 3:
            stack.pop()
        if not stack:
            return False
        v = stack.pop()
        nbrs = sorted(u for (a, b) in incident if v in (a, b) for u in (a, b) if u != v)
        if len(nbrs) != 3:
            return False
        u1, u2, u3 = nbrs
        f_opp = []
        for u, w in ((u2, u3), (u1, u3), (u1, u2)):
            key = (u, w)
            fs = [f for f in incident.get(key, []) if v in faces[f]]
            if len(fs) != 1:
                return False
            f_opp.append(fs[0])
        if len(set(f_opp)) != 3:
            return False
        for u in nbrs:
            key = (min(u, v), max(u, v))
            del incident[key]
            deg[u] -= 1
        for (u, w), f_old in (((u2, u3), f_opp[0]), ((u1, u3), f_opp[1]), ((u1, u2), f_opp[2])):
            fs = incident[(u, w)]
            fs.remove(f_old)
            fs.append(next_face)
        for f_old in f_opp:
            del faces[f_old]
        faces[next_face] = (u1, u2, u3)
        next_face += 1
        deg[v] = 0
        alive -= 1
        for u in nbrs:
            if deg[u] == 3:
                stack.append(u)
    corners = set()
    for cls in faces.values():
        corners.update(cls)
    return len(faces) == 4 and len(corners) == 4


def _a_pairings(m: int, tri_of_pos: list[int], tris: list[tuple[int, int, int]]):
    """Valid Apollonian pairings of a cut map, as partner arrays.

    Arcs merge vertex classes with rollback; an arc whose glued edge would
    close a loop is pruned immediately (Apollonian gluings on at least five
    vertices are simple).  Survivors get the full simplicity and peeling
    check at the leaf.
    """
    partner = [-1] * m
    parent = list(range(m))
    size = [1] * m
    trail: list[int] = []
    out = []
    allow_nonsimple = m == 4  # the double triangle is the one exception

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def union(a: int, b: int) -> bool:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        trail.append(rb)
        return True

    def rollback(mark: int):
        while len(trail) > mark:
            rb = trail.pop()
            size[find(rb)] -= size[rb]
            parent[rb] = rb

    def leaf() -> bool:
        labels: dict[int, int] = {}
        triples = []
        for u, v, w in tris:
            cls = []
            for x in (u, v, w):
                r = find(x)
                if r not in labels:
                    labels[r] = len(labels)
                cls.append(labels[r])
            if len(set(cls)) != 3 and not allow_nonsimple:
                return False
            triples.append(tuple(cls))
        if allow_nonsimple:
            c1, c2 = sorted(triples[0]), sorted(triples[1])
            return c1 == c2 and len(set(c1)) == 3
        return _is_apollonian_triples(triples, len(labels))

    def rec(pos: int, stack: list[int]):
        if pos == m:
            if leaf():
                out.append(tuple(partner))
            return
        if stack:
            q = stack[-1]
            mark = len(trail)
            union(q, (pos + 1) % m)
            union((q + 1) % m, pos)
            if allow_nonsimple or find(q) != find((q + 1) % m):
                partner[q], partner[pos] = pos, q
                stack.pop()
                rec(pos + 1, stack)
                stack.append(q)
                partner[q] = partner[pos] = -1
            rollback(mark)
        if m - pos - 1 > len(stack):
            stack.append(pos)
            rec(pos + 1, stack)
            stack.pop()

    rec(0, [])
    return out


def _loop_count_arrays(m: int, p1, p2) -> int:
    parent = list(range(m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = m
    for i in range(m):
        for j in (p1[i], p2[i]):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri
                comps -= 1
    return comps


def enumerate_Mn(
    n: int, extended: bool = False, progress: bool = False
) -> EnumerationReport:
    """Exact M_n(x) by scanning all outerplanar triangulations of size n."""
    cap = EXTENDED_CAP if extended else DEFAULT_CAP
    if not 2 <= n <= cap:
        raise EnumerationCapExceeded(
            f"n={n} outside the configured cap {cap}"
            + ("" if extended else " (use extended mode for n=8)")
        )
    start = time.perf_counter()
    report = EnumerationReport(n=n, coefficients={})
    m = 2 * n
    coeffs: dict[int, int] = {}
    total_maps = catalan(2 * n - 2)
    for idx, t in enumerate(enumerate_outerplanar(n)):
        if progress and idx % 200000 == 0 and idx:
            elapsed = time.perf_counter() - start
            print(f"  scanned {idx}/{total_maps} maps in {elapsed:.0f}s", flush=True)
        tri_of_pos, tris = _map_arrays(t)
        report.maps_scanned += 1
        hs = _h_pairings(m, tri_of_pos, tris)
        if not hs:
            continue
        report.maps_with_h += 1
        report.h_candidates += len(hs)
        as_ = _a_pairings(m, tri_of_pos, tris)
        report.a_candidates += len(as_)
        for ph in hs:
            for pa in as_:
                loops = _loop_count_arrays(m, ph, pa)
                coeffs[loops] = coeffs.get(loops, 0) + 1
                report.triples += 1
    report.coefficients = dict(sorted(coeffs.items()))
    report.seconds = time.perf_counter() - start
    return report


def catalog(n: int) -> list[TripleTree]:
    """All triple trees of size n, validated, in scan order."""
    if n < 2:
        raise ValueError("catalog requires n >= 2")
    if n > EXTENDED_CAP:
        raise EnumerationCapExceeded(f"n={n} outside the configured cap")
    out = []
    m = 2 * n
    for t in enumerate_outerplanar(n):
        tri_of_pos, tris = _map_arrays(t)
        hs = _h_pairings(m, tri_of_pos, tris)
        if not hs:
            continue
        as_ = _a_pairings(m, tri_of_pos, tris)
        for ph in hs:
            for pa in as_:
                out.append(
                    validate_triple(
                        t, NonCrossingPairing(n, ph), NonCrossingPairing(n, pa)
                    )
                )
    return out


# ---------------------------------------------------------------------------
# Generating functions
# ---------------------------------------------------------------------------

def hierarchical_count(n: int) -> int:
    """|H_n| = 2 * 3^(n-2) * Cat(n-2) for n >= 2."""
    if n < 2:
        raise ValueError("hierarchical_count requires n >= 2")
    return 2 * 3 ** (n - 2) * catalan(n - 2)


def h_series(order: int) -> TruncatedSeries:
    """H(z) = (1 - sqrt(1 - 12z)) / 3; coefficient of z^k counts H_(k+1)."""
    one = TruncatedSeries.constant(1, order)
    z = TruncatedSeries.z(order)
    root = (one - 12 * z).sqrt()
    return TruncatedSeries([c / 3 for c in (one - root).coeffs], order)


def h_series_from_system(order: int) -> TruncatedSeries:
    """H(z) via the fixed point of the two-family system, for cross-checking
    the closed form: H1 = z(H2 + 4 H1 H2 + 3 H1^2 H2), H2 = 1 + 2z H2^2 (1+H1),
    H = 2z H2 (1+H1)."""
    z = TruncatedSeries.z(order)
    one = TruncatedSeries.constant(1, order)
    h1 = TruncatedSeries.constant(0, order)
    h2 = TruncatedSeries.constant(0, order)
    for _ in range(order + 2):
        h1, h2 = (
            z * (h2 + 4 * h1 * h2 + 3 * h1 * h1 * h2),
            one + 2 * z * h2 * h2 * (one + h1),
        )
    return 2 * z * h2 * (one + h1)


def apollonian_system(order: int) -> tuple[TruncatedSeries, TruncatedSeries, TruncatedSeries]:
    """Fixed point of the root-face system A1, A2, A3."""
    z = TruncatedSeries.z(order)
    one = TruncatedSeries.constant(1, order)
    a1 = TruncatedSeries.constant(0, order)
    a2 = TruncatedSeries.constant(0, order)
    a3 = TruncatedSeries.constant(0, order)
    for _ in range(order + 2):
        a1, a2, a3 = (
            z
            * (
                a3 * a3 * a3
                + 12 * a2 * a3 * a3
                + 3 * a1 * a3 * a3
                + 36 * a2 * a2 * a3
                + 14 * a2 * a2 * a2
                + 12 * a1 * a2 * a3
            ),
            z * (a3 * a3 * a3 + 7 * a2 * a3 * a3 + 7 * a2 * a2 * a3 + a1 * a3 * a3),
            one + z * (3 * a3 * a3 * a3 + 6 * a2 * a3 * a3),
        )
    return a1, a2, a3


def apollonian_series(order: int) -> TruncatedSeries:
    """A(z) = 2 z^2 A2 + 2 z^2 A3; coefficient of z^n counts A_n."""
    if order < 2:
        raise ValueError("order must be at least 2")
    _, a2, a3 = apollonian_system(order)
    return (2 * a2 + 2 * a3).shift(2)


def a3_algebraic_relation(order: int) -> TruncatedSeries:
    """81 z^2 A3^6 - 54 z A3^4 + 108 z A3^3 + 4 A3^3 + 9 A3^2 - 48 A3 + 35,
    identically zero as a power series."""
    _, _, a3 = apollonian_system(order)
    a3_2 = a3 * a3
    a3_3 = a3_2 * a3
    a3_4 = a3_3 * a3
    a3_6 = a3_3 * a3_3
    return (
        (81 * a3_6).shift(2)
        + (-54 * a3_4 + 108 * a3_3).shift(1)
        + 4 * a3_3
        + 9 * a3_2
        - 48 * a3
        + 35
    )


GROWTH_POLYNOMIAL = (1296, 363232, -16927248, 438097032, -8977010004, 28680825384, -24111675)


def apollonian_growth_constant(tolerance: float = 1e-9) -> float:
    """Largest real root of the degree-6 growth polynomial, by bisection on
    the sign change bracketed in [28, 29]."""

    def p(c: Fraction) -> Fraction:
        acc = Fraction(0)
        for coeff in GROWTH_POLYNOMIAL:
            acc = acc * c + coeff
        return acc

    lo, hi = Fraction(28), Fraction(29)
    if p(lo) >= 0 or p(hi) <= 0:
        raise AssertionError("bracket does not enclose the growth constant")
    while hi - lo > Fraction(tolerance).limit_denominator(10**15) / 2:
        mid = (lo + hi) / 2
        if p(mid) < 0:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


# ---------------------------------------------------------------------------
# The special subdivision class
# ---------------------------------------------------------------------------

def special_class_count(k: int) -> int:
    """3^k * (2k+2)/(3k+1) * binom(3k+1, k) rooted triple trees of size 2k+2."""
    if k < 0:
        raise ValueError("k must be >= 0")
    num = 3**k * (2 * k + 2) * math.comb(3 * k + 1, k)
    if num % (3 * k + 1):
        raise AssertionError("special class count is not integral")
    return num // (3 * k + 1)


def subdivision_choices(tt: TripleTree) -> list[tuple[int, int, int, int]]:
    """All (A, B, v_A, v_B) with A, B companion triangles of the hierarchical
    gluing and v_A, v_B identified vertices; 3n-3 choices in total."""
    h = glue(tt.t, tt.pi_h)
    pairing = companion_pairing(h)
    if pairing is None:
        raise ValueError("triple tree lost its hierarchical gluing")
    choices = []
    for a_idx, b_idx in pairing.items():
        if a_idx > b_idx:
            continue
        cls_b = h.face_classes(b_idx)
        for pa in range(3):
            cls = h.vertex[3 * a_idx + pa]
            pb = cls_b.index(cls)
            v_a = tt.t.triangles[a_idx][pa]
            v_b = tt.t.triangles[b_idx][pb]
            choices.append((a_idx, b_idx, v_a, v_b))
    return choices


def _star_divide_glued(
    tri, splits: list[tuple[int, int]]
):
    """Star-divide faces of a closed glued triangulation.

    splits lists (face, corner position); each split face is replaced by
    three faces around a fresh center vertex, with the spoke edge at the
    chosen corner joining the distinguished set E0.  Returns the divided
    triangulation together with the map from old surviving darts to new
    dart ids and the dart realizing each new spoke.
    """
    from .planar import Triangulation2D

    split_faces = {f: p for f, p in splits}
    twin_new: list[int] = []
    vertex_new: list[int] = []
    dart_map: dict[int, int] = {}
    spoke_darts: dict[int, int] = {}
    next_center = tri.n_vertices

    def alloc(old_dart: int | None, tail: int) -> int:
        d = len(twin_new)
        twin_new.append(-1)
        vertex_new.append(tail)
        if old_dart is not None:
            dart_map[old_dart] = d
        return d

    pending: list[tuple[int, int]] = []  # fresh twin pairs (by new ids)
    for f in range(tri.n_faces):
        if f not in split_faces:
            for p in range(3):
                alloc(3 * f + p, tri.vertex[3 * f + p])
            continue
        p = split_faces[f]
        center = next_center
        next_center += 1
        v = tri.vertex[3 * f + p]
        w1 = tri.vertex[3 * f + (p + 1) % 3]
        w2 = tri.vertex[3 * f + (p + 2) % 3]
        d_vp = 3 * f + p  # v -> w1
        d_pq = 3 * f + (p + 1) % 3  # w1 -> w2
        d_qv = 3 * f + (p + 2) % 3  # w2 -> v
        # Face (center, v, w1): spoke in, old side, spoke out.
        s1 = alloc(None, center)
        alloc(d_vp, v)
        s2 = alloc(None, w1)
        # Face (center, w1, w2).
        s3 = alloc(None, center)
        alloc(d_pq, w1)
        s4 = alloc(None, w2)
        # Face (center, w2, v).
        s5 = alloc(None, center)
        alloc(d_qv, w2)
        s6 = alloc(None, v)
        pending.extend([(s2, s3), (s4, s5), (s6, s1)])
        spoke_darts[f] = s1  # dart center -> v of the distinguished spoke

    for d_old in range(tri.n_darts):
        f = d_old // 3
        if f in split_faces:
            continue
        tw = tri.twin[d_old]
        if tw // 3 in split_faces:
            continue
        twin_new[dart_map[d_old]] = dart_map[tw]
    # Twins of surviving darts whose old twin sat inside a split face: the
    # old dart id persists in dart_map for the relocated side as well.
    for d_old, d_new in dart_map.items():
        if twin_new[d_new] == -1:
            twin_new[d_new] = dart_map[tri.twin[d_old]]
            twin_new[dart_map[tri.twin[d_old]]] = d_new
    for x, y in pending:
        twin_new[x], twin_new[y] = y, x

    e0_new = {dart_map[d] for d in tri.e0_darts}
    for f, s1 in spoke_darts.items():
        e0_new.add(s1)
        e0_new.add(twin_new[s1])
    out = Triangulation2D(
        twin=tuple(twin_new),
        vertex=tuple(vertex_new),
        n_vertices=next_center,
        planar=tri.planar,
        e0_darts=frozenset(e0_new),
        root_dart=dart_map[tri.root_dart],
    )
    return out, dart_map, spoke_darts


def special_subdivide(
    tt: TripleTree, choice: tuple[int, int, int, int]
) -> TripleTree:
    """Insert a mirrored pair of star divisions at companion triangles.

    The Apollonian gluing is star-divided at both triangles and the tree
    grows by the spoke at the chosen identified vertex; cutting back open
    yields the outerplanar triangulation of size n+2 with two new adjacent
    boundary pairs, and the hierarchical pairing joins the two slits
    crosswise.  The meander gains exactly one loop.
    """
    a_idx, b_idx, v_a, v_b = choice
    t = tt.t
    h = glue(t, tt.pi_h)
    pairing = companion_pairing(h)
    if pairing is None or pairing.get(a_idx) != b_idx:
        raise ValueError("chosen triangles are not companions")
    tri_a, tri_b = t.triangles[a_idx], t.triangles[b_idx]
    if v_a not in tri_a or v_b not in tri_b:
        raise ValueError("chosen vertices are not on the chosen triangles")
    pa, pb = tri_a.index(v_a), tri_b.index(v_b)
    if h.vertex[3 * a_idx + pa] != h.vertex[3 * b_idx + pb]:
        raise ValueError("chosen vertices are not identified in the gluing")

    from .planar import unglue_faces

    a = glue(t, tt.pi_a)
    divided, dart_map, spokes = _star_divide_glued(a, [(a_idx, pa), (b_idx, pb)])
    faces, partner_a, contour = unglue_faces(divided)
    pos_of = {d: k for k, d in enumerate(contour)}
    m2 = len(partner_a)
    t2 = OuterplanarTriangulation(t.n + 2, tuple(faces))

    partner_h = [-1] * m2
    for k in range(2 * t.n):
        i = pos_of[dart_map[a.position_darts[k]]]
        j = pos_of[dart_map[a.position_darts[tt.pi_h.partner[k]]]]
        partner_h[i] = j
        partner_h[j] = i
    # The two slits pair crosswise; each slit occupies two consecutive
    # positions (a leaf of the spanning tree is walked there and back).
    xa = sorted((pos_of[spokes[a_idx]], pos_of[divided.twin[spokes[a_idx]]]))
    xb = sorted((pos_of[spokes[b_idx]], pos_of[divided.twin[spokes[b_idx]]]))
    (lo, hi) = sorted((xa, xb))
    partner_h[lo[0]], partner_h[hi[1]] = hi[1], lo[0]
    partner_h[lo[1]], partner_h[hi[0]] = hi[0], lo[1]

    pi_a2 = NonCrossingPairing(t.n + 2, tuple(partner_a))
    pi_h2 = NonCrossingPairing(t.n + 2, tuple(partner_h))
    return validate_triple(t2, pi_h2, pi_a2)


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

def bounds_report(n: int, report: EnumerationReport | None = None) -> dict:
    """Finite-size forms of the exponential bounds.

    Upper: M_n(1) <= |H_n| * Cat(n).  Lower: the coefficient of x^(k+2) in
    M_(2k+2)(x) is at least the special class count.
    """
    if report is None:
        report = enumerate_Mn(n, extended=n > DEFAULT_CAP)
    upper = hierarchical_count(n) * catalan(n)
    total = report.total()
    out = {
        "format": "ttlab/1",
        "n": n,
        "total": total,
        "upper_bound": upper,
        "upper_holds": total <= upper,
    }
    if n % 2 == 0:
        k = n // 2 - 1
        coeff = report.coefficients.get(k + 2, 0)
        out["special_class_count"] = special_class_count(k)
        out["x_power"] = k + 2
        out["coefficient"] = coeff
        out["lower_holds"] = coeff >= special_class_count(k)
    return out
