"""Meander systems of two non-crossing pairings: loops, zones, zone trees.

Positions 0..2n-1 are the vertices of the cycle gamma_n (equivalently the
boundary edges of the cut polygon).  Loops are the orbits of the group
generated by the two pairings.  Zones come in two colors: position i and
i+1 share a white vertex when i is even and a black vertex when i is odd
(the origin of the root edge is black), giving the two adjacent-position
involutions pi_white and pi_black whose orbits together with the pairings
are the zones of that color.
"""

from __future__ import annotations

from dataclasses import dataclass

from .combinatorics import DisjointSets


def _partners(pi) -> list[int]:
    return list(pi.partner) if hasattr(pi, "partner") else list(pi)


def loop_count(pi1, pi2) -> int:
    """Number of loops of the meander system [pi1, pi2]."""
    p1, p2 = _partners(pi1), _partners(pi2)
    if len(p1) != len(p2):
        raise ValueError("pairings have different sizes")
    ds = DisjointSets(len(p1))
    for i in range(len(p1)):
        ds.union(i, p1[i])
        ds.union(i, p2[i])
    return ds.components


@dataclass(frozen=True)
class MeanderSystem:
    """Fully labeled meander system.

    loop_id, white_zone and black_zone give per-position labels, all
    canonicalized to first-appearance order while scanning the positions.
    Zone ids share one id space; zone_color[z] is "white" or "black".
    """

    n: int
    pi1: tuple[int, ...]
    pi2: tuple[int, ...]
    loop_id: tuple[int, ...]
    white_zone: tuple[int, ...]
    black_zone: tuple[int, ...]
    zone_color: tuple[str, ...]

    @property
    def n_loops(self) -> int:
        return max(self.loop_id) + 1

    @property
    def n_zones(self) -> int:
        return len(self.zone_color)

    def csv(self) -> str:
        lines = ["# ttlab/1", "position,loop,zone,color"]
        for i in range(2 * self.n):
            lines.append(f"{i},{self.loop_id[i]},{self.white_zone[i]},white")
            lines.append(f"{i},{self.loop_id[i]},{self.black_zone[i]},black")
        return "\n".join(lines) + "\n"


def _orbit_labels(m: int, involutions: list[list[int]]) -> list[int]:
    ds = DisjointSets(m)
    for inv in involutions:
        for i in range(m):
            ds.union(i, inv[i])
    return ds.canonical_labels()


def zones(pi1, pi2) -> MeanderSystem:
    """Label loops and zones of the meander system of two non-crossing pairings."""
    p1, p2 = _partners(pi1), _partners(pi2)
    if len(p1) != len(p2):
        raise ValueError("pairings have different sizes")
    m = len(p1)
    for p in (p1, p2):
        stack: list[int] = []
        for i in range(m):
            if p[i] > i:
                stack.append(i)
            elif not stack or stack.pop() != p[i]:
                raise ValueError("zones are defined for non-crossing pairings only")

    pi_white = [i + 1 if i % 2 == 0 else i - 1 for i in range(m)]
    pi_black = [(i - 1) % m if i % 2 == 0 else (i + 1) % m for i in range(m)]

    loops = _orbit_labels(m, [p1, p2])
    white = _orbit_labels(m, [p1, p2, pi_white])
    black = _orbit_labels(m, [p1, p2, pi_black])

    # One zone id space, first-appearance order over (white, black) per position.
    zone_ids: dict[tuple[str, int], int] = {}
    colors: list[str] = []
    for i in range(m):
        for color, orbit in (("white", white[i]), ("black", black[i])):
            if (color, orbit) not in zone_ids:
                zone_ids[(color, orbit)] = len(colors)
                colors.append(color)
    wz = tuple(zone_ids[("white", white[i])] for i in range(m))
    bz = tuple(zone_ids[("black", black[i])] for i in range(m))
    return MeanderSystem(
        n=m // 2,
        pi1=tuple(p1),
        pi2=tuple(p2),
        loop_id=tuple(loops),
        white_zone=wz,
        black_zone=bz,
        zone_color=tuple(colors),
    )


@dataclass(frozen=True)
class ZoneTree:
    """Zone adjacency tree: one vertex per zone, one edge per loop.

    edges[k] is the (white zone, black zone) pair separated by loop k.
    """

    n_zones: int
    edges: tuple[tuple[int, int], ...]
    zone_color: tuple[str, ...]


def zone_adjacency_tree(pi1, pi2) -> ZoneTree:
    """The tree whose vertices are zones and whose edges are loops."""
    ms = zones(pi1, pi2)
    m = 2 * ms.n
    by_loop: dict[int, tuple[int, int]] = {}
    for i in range(m):
        pair = (ms.white_zone[i], ms.black_zone[i])
        if ms.loop_id[i] in by_loop:
            if by_loop[ms.loop_id[i]] != pair:
                raise AssertionError("loop borders more than two zones")
        else:
            by_loop[ms.loop_id[i]] = pair
    edges = tuple(by_loop[k] for k in range(len(by_loop)))

    ds = DisjointSets(ms.n_zones)
    for u, v in edges:
        if not ds.union(u, v):
            raise AssertionError("zone adjacency graph has a cycle")
    if ds.components != 1:
        raise AssertionError("zone adjacency graph is disconnected")
    return ZoneTree(n_zones=ms.n_zones, edges=edges, zone_color=ms.zone_color)
