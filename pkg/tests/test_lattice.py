from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percolab.lattice import (
    LatticeKind,
    LatticeSpec,
    Region,
    TRIANGULAR,
    Z2_BOND,
    box_sites,
    box_with_boundary,
    linf_distance,
    neighbors,
    outer_boundary,
    rect_region,
)

Z3_BOND = LatticeSpec(LatticeKind.Z_BOND, 3)

coord = st.integers(-50, 50)
site2 = st.tuples(coord, coord)


def test_box_degenerate():
    assert box_sites((0, 0), 0).sites == {(0, 0)}


def test_box_radius_one():
    assert len(box_sites((0, 0), 1)) == 9


def test_box_translated():
    region = box_sites((3, 3), 2)
    assert len(region) == 25
    assert all(1 <= x <= 5 and 1 <= y <= 5 for x, y in region)


def test_box_negative_radius_rejected():
    with pytest.raises(ValueError):
        box_sites((0, 0), -1)


@given(st.tuples(coord, coord, coord), st.integers(0, 4))
@settings(max_examples=30)
def test_box_cardinality_3d(center, n):
    assert len(box_sites(center, n)) == (2 * n + 1) ** 3


def test_boundary_z2_box1():
    ob = outer_boundary(box_sites((0, 0), 1), Z2_BOND)
    expected = {(2, y) for y in (-1, 0, 1)} | {(-2, y) for y in (-1, 0, 1)}
    expected |= {(x, 2) for x in (-1, 0, 1)} | {(x, -2) for x in (-1, 0, 1)}
    assert ob.sites == expected
    assert len(ob) == 12


def test_boundary_triangular_point():
    ob = outer_boundary(Region(frozenset({(0, 0)})), TRIANGULAR)
    assert ob.sites == {(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)}


def test_boundary_z2_box2_brute_force():
    # independent adjacency scan
    box = box_sites((0, 0), 2)
    brute = set()
    for x in range(-4, 5):
        for y in range(-4, 5):
            if (x, y) in box:
                continue
            if any((x + dx, y + dy) in box for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))):
                brute.add((x, y))
    ob = outer_boundary(box, Z2_BOND)
    assert ob.sites == brute
    assert len(ob) == 20


def test_neighbors_z2():
    assert neighbors((0, 0), Z2_BOND).sites == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_neighbors_triangular():
    ns = neighbors((0, 0), TRIANGULAR).sites
    assert len(ns) == 6
    assert (1, 1) in ns and (-1, -1) in ns
    assert (1, -1) not in ns


def test_neighbors_dimension_mismatch():
    with pytest.raises(ValueError):
        neighbors((2, 5), Z3_BOND)


def test_linf_examples():
    assert linf_distance((0, 0), (4, 3)) == 4
    assert linf_distance((1, 1), (1, 1)) == 0
    assert linf_distance((-2, 5), (3, 5)) == 5


def test_linf_dimension_mismatch():
    with pytest.raises(ValueError):
        linf_distance((0, 0), (1, 2, 3))


@given(site2, site2, site2)
@settings(max_examples=100)
def test_linf_metric(u, v, w):
    assert linf_distance(u, v) == linf_distance(v, u)
    assert linf_distance(u, w) <= linf_distance(u, v) + linf_distance(v, w)
    assert (linf_distance(u, v) == 0) == (u == v)


@given(site2, st.sampled_from([TRIANGULAR, Z2_BOND]))
@settings(max_examples=50)
def test_neighbors_symmetric(v, lattice):
    for w in neighbors(v, lattice):
        assert v in neighbors(w, lattice)


@given(st.integers(0, 3), st.sampled_from([TRIANGULAR, Z2_BOND]))
@settings(max_examples=20)
def test_boundary_disjoint_from_region(n, lattice):
    box = box_sites((0, 0), n)
    assert not outer_boundary(box, lattice).sites & box.sites


def test_triangular_boundary_excludes_antidiagonal_corners():
    ob = outer_boundary(box_sites((0, 0), 2), TRIANGULAR)
    assert (3, 3) in ob and (-3, -3) in ob
    assert (3, -3) not in ob and (-3, 3) not in ob


def test_lattice_spec_validation():
    with pytest.raises(ValueError):
        LatticeSpec(LatticeKind.TRIANGULAR_SITE, 3)
    with pytest.raises(ValueError):
        LatticeSpec(LatticeKind.Z_BOND, 1)


def test_region_empty_needs_dim():
    with pytest.raises(ValueError):
        Region(frozenset())
    r = Region(frozenset(), dim=2)
    assert len(r) == 0 and r.d == 2


def test_region_mixed_dimension_rejected():
    with pytest.raises(ValueError):
        Region(frozenset({(0, 0), (1, 2, 3)}))


def test_rect_region():
    r = rect_region((1, 2), (2, 1))
    assert len(r) == 6
    assert r.origin == (1, 2) and r.extent == (2, 1)
    lo, hi = r.bounds()
    assert lo == (1, 2) and hi == (3, 3)


def test_region_json_sorted():
    r = Region(frozenset({(1, 0), (0, 1)}))
    assert r.to_json() == [[0, 1], [1, 0]]


def test_box_with_boundary_cached_and_complete():
    r1 = box_with_boundary(TRIANGULAR, 3)
    r2 = box_with_boundary(TRIANGULAR, 3)
    assert r1 is r2
    assert box_sites((0, 0), 3).sites <= r1.sites
