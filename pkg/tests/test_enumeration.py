import math

import pytest

from ttlab.combinatorics import catalan, enumerate_outerplanar, enumerate_pairings
from ttlab.enumeration import (
    EnumerationCapExceeded,
    a3_algebraic_relation,
    apollonian_growth_constant,
    apollonian_series,
    bounds_report,
    catalog,
    enumerate_Mn,
    h_series,
    h_series_from_system,
    hierarchical_count,
    special_class_count,
    special_subdivide,
    subdivision_choices,
)
from ttlab.meander import loop_count
from ttlab.planar import is_in_A, is_in_H

# The printed bivariate expansion, the strongest oracle of the package.
M_EXPANSION = {
    2: {2: 2},
    3: {},
    4: {1: 8, 3: 12},
    5: {1: 60, 2: 40},
    6: {1: 336, 2: 996, 3: 420, 4: 618},
    7: {1: 5460, 2: 10416, 3: 6496, 4: 1652},
    8: {1: 63344, 2: 135776, 3: 150544, 4: 75360, 5: 46360},
}


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_enumerate_Mn_matches_expansion_small(n):
    assert enumerate_Mn(n).coefficients == M_EXPANSION[n]


def test_enumerate_Mn_matches_brute_force_n4():
    brute = {}
    for t in enumerate_outerplanar(4):
        pis = list(enumerate_pairings(4))
        hs = [pi for pi in pis if is_in_H(t, pi)]
        as_ = [pi for pi in pis if is_in_A(t, pi)]
        for ph in hs:
            for pa in as_:
                loops = loop_count(ph, pa)
                brute[loops] = brute.get(loops, 0) + 1
    assert enumerate_Mn(4).coefficients == brute


def test_enumeration_cap():
    with pytest.raises(EnumerationCapExceeded):
        enumerate_Mn(8)
    with pytest.raises(EnumerationCapExceeded):
        enumerate_Mn(9, extended=True)


def test_catalog_n4():
    cat = catalog(4)
    assert len(cat) == 20
    loops = sorted(tt.loops for tt in cat)
    assert loops.count(1) == 8 and loops.count(3) == 12


def test_h_candidates_count_H_members():
    # The per-map hierarchical scan enumerates H_n grouped by map.
    for n in (2, 3, 4, 5):
        assert enumerate_Mn(n).h_candidates == hierarchical_count(n)


def test_hierarchical_count_values():
    assert [hierarchical_count(n) for n in (2, 3, 4, 5)] == [2, 6, 36, 270]
    assert hierarchical_count(5) == 2 * 27 * catalan(3)


def test_hierarchical_brute_force_counts():
    for n in (2, 3, 4, 5):
        got = sum(
            1
            for t in enumerate_outerplanar(n)
            for pi in enumerate_pairings(n)
            if is_in_H(t, pi)
        )
        assert got == hierarchical_count(n)


def test_h_series_matches_closed_form_and_counts():
    s = h_series(12)
    coeffs = s.integer_coefficients()
    assert coeffs[1:4] == [2, 6, 36]
    for k in range(1, 13):
        assert coeffs[k] == hierarchical_count(k + 1)
    assert h_series_from_system(12) == s


def test_apollonian_series_values():
    s = apollonian_series(7)
    assert s.integer_coefficients() == [0, 0, 2, 8, 100, 1680, 32414, 677810]


def test_apollonian_brute_force_counts():
    s = apollonian_series(5)
    for n in (2, 3, 4, 5):
        got = sum(
            1
            for t in enumerate_outerplanar(n)
            for pi in enumerate_pairings(n)
            if is_in_A(t, pi)
        )
        assert got == s.integer_coefficients()[n]


def test_a3_relation_vanishes():
    rel = a3_algebraic_relation(12)
    assert all(c == 0 for c in rel.coeffs)


def test_growth_constant():
    c = apollonian_growth_constant()
    assert abs(c - 28.43330) < 1e-4


def test_special_class_counts():
    assert special_class_count(0) == 2
    assert special_class_count(1) == 12
    assert special_class_count(2) == 162


def test_subdivision_choice_count():
    for n in (2, 4, 5):
        for tt in catalog(n):
            assert len(subdivision_choices(tt)) == 3 * n - 3


def test_subdivision_of_seeds_gives_the_twelve():
    # The two seeds have three subdivision sites each; allowing arbitrary
    # re-rooting of the six children covers precisely the twelve rooted
    # size-4 triples with three loops (the k=1 class count).
    from ttlab.planar import reroot_triple

    seeds = catalog(2)
    children = set()
    for tt in seeds:
        for choice in subdivision_choices(tt):
            child = special_subdivide(tt, choice)
            assert child.n == 4
            assert child.loops == tt.loops + 1 == 3
            children.add(child)
    assert len({c.key() for c in children}) == 6
    orbit = {
        reroot_triple(c, r).key() for c in children for r in range(8)
    }
    with_three = {tt.key() for tt in catalog(4) if tt.loops == 3}
    assert orbit == with_three and len(orbit) == 12 == special_class_count(1)


def test_subdivision_closure_and_loop_increment():
    for n in (4, 5):
        for tt in catalog(n)[:40]:
            for choice in subdivision_choices(tt)[:4]:
                child = special_subdivide(tt, choice)  # validates on build
                assert child.n == n + 2
                assert child.loops == tt.loops + 1


def test_subdivision_children_distinct():
    tt = catalog(4)[0]
    keys = {special_subdivide(tt, c).key() for c in subdivision_choices(tt)}
    assert len(keys) == 3 * 4 - 3


def test_bounds_report():
    rep = enumerate_Mn(4)
    out = bounds_report(4, rep)
    assert out["upper_holds"] and out["lower_holds"]
    assert out["coefficient"] == 12 == out["special_class_count"]
    out6 = bounds_report(6, enumerate_Mn(6))
    assert out6["total"] == 2370
    assert out6["upper_holds"]
    assert out6["special_class_count"] == 162 <= out6["coefficient"]
