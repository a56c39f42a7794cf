import itertools

import pytest

from ttlab.planar import Triangulation2D


def closed_from_faces(face_cycles):
    """Build a closed Triangulation2D from consistently oriented face cycles."""
    by_arrow = {}
    for f, cyc in enumerate(face_cycles):
        for p in range(3):
            by_arrow[(cyc[p], cyc[(p + 1) % 3])] = 3 * f + p
    twin = [-1] * (3 * len(face_cycles))
    for (u, v), d in by_arrow.items():
        twin[d] = by_arrow[(v, u)]
    vertex = tuple(
        face_cycles[d // 3][d % 3] for d in range(3 * len(face_cycles))
    )
    n_vertices = len(set(vertex))
    n_edges = 3 * len(face_cycles) // 2
    chi = n_vertices - n_edges + len(face_cycles)
    return Triangulation2D(
        twin=tuple(twin), vertex=vertex, n_vertices=n_vertices, planar=(chi == 2)
    )


@pytest.fixture
def double_triangle():
    return closed_from_faces([(0, 1, 2), (1, 0, 2)])


@pytest.fixture
def tetrahedron_boundary():
    return closed_from_faces([(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)])


def all_involutions(m):
    """All fixed-point-free involutions of {0..m-1} as partner arrays."""
    def rec(unmatched):
        if not unmatched:
            yield []
            return
        first = unmatched[0]
        for k in range(1, len(unmatched)):
            j = unmatched[k]
            rest = unmatched[1:k] + unmatched[k + 1:]
            for arcs in rec(rest):
                yield [(first, j)] + arcs

    for arcs in rec(list(range(m))):
        partner = [-1] * m
        for i, j in arcs:
            partner[i], partner[j] = j, i
        yield partner
