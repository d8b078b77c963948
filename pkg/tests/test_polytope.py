from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal.errors import ConfigurationError, InvalidRegion
from dworkcrystal.fixtures import example_family, legendre, simplex, square
from dworkcrystal.polytope import (
    all_open_regions,
    build_polytope,
    cone_membership,
    faces_complement_region,
    full_region,
    interior_lattice_points,
    interior_region,
    level_region,
    one_vertex_region,
    region_from_points,
)


def _hull(points):
    """Monotone chain convex hull, counterclockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _inside(hull, x):
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        if (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) < 0:
            return False
    return True


point_sets = st.lists(st.tuples(st.integers(-3, 4), st.integers(-3, 4)), min_size=3, max_size=7)


@given(point_sets)
def test_lattice_points_match_brute_force(support):
    hull = _hull(support)
    if len(hull) < 3:
        return
    P = build_polytope(support)
    xs = [p[0] for p in support]
    ys = [p[1] for p in support]
    expected = {x for x in product(range(min(xs), max(xs) + 1), range(min(ys), max(ys) + 1)) if _inside(hull, x)}
    assert set(P.lattice_points()) == expected
    assert sorted(P.vertices) == sorted(hull)


@given(point_sets, st.integers(1, 3))
def test_scaled_points_are_dilations(support, k):
    if len(_hull(support)) < 3:
        return
    P = build_polytope(support)
    scaled = build_polytope([(k * a, k * b) for a, b in support])
    assert set(P.scaled_lattice_points(k)) == set(scaled.lattice_points())


def test_legendre_triangle():
    P = build_polytope(legendre().support())
    assert P.vertices == [(0, 2), (1, 0), (3, 0)]
    assert len(P.lattice_points()) == 5
    assert interior_lattice_points(P) == [(1, 1)]
    assert interior_region(P).lattice_points == [(1, 1)]
    assert len(P.faces) == 7


def test_regions_of_example_family():
    P = build_polytope(example_family().support())
    assert level_region(P, 0).lattice_points == [(1, 1)]
    assert set(level_region(P, 1).lattice_points) == {(1, 1), (2, 0)}
    assert len(full_region(P).lattice_points) == 5
    R = faces_complement_region(P, [[(1, 0), (3, 0)]])
    assert set(R.lattice_points) == {(0, 2), (1, 1)}
    assert R.is_open()


def test_region_from_points_rejects_non_open_sets():
    P = build_polytope(legendre().support())
    with pytest.raises(InvalidRegion):
        region_from_points(P, [(2, 0)])  # an edge point without the interior
    assert region_from_points(P, [(1, 1), (2, 0)]).is_open()


def test_one_vertex_region():
    P = build_polytope(simplex().support())
    assert one_vertex_region(P, (0, 0)).lattice_points == [(0, 0)]
    Q = build_polytope(legendre().support())
    with pytest.raises(InvalidRegion):
        one_vertex_region(Q, (1, 0))


def _closed_subcomplex_count(P):
    proper = [F for F in P.faces if F.codimension > 0]
    count = 0
    for mask in range(1 << len(proper)):
        chosen = [proper[i] for i in range(len(proper)) if mask >> i & 1]
        keys = {F.facets for F in chosen}
        # closed under taking subfaces (a subface has a larger facet set)
        if all(G.facets in keys for F in chosen for G in proper if G.facets >= F.facets):
            count += 1
    return count


def test_open_region_counts():
    tri = build_polytope(legendre().support())
    sq = build_polytope(square().support())
    # a triangle boundary has 18 closed subcomplexes; the interior point survives all of them
    assert _closed_subcomplex_count(tri) == 18
    assert len(all_open_regions(tri)) == 18
    # a 4-cycle has 47; the 16 containing every vertex leave no lattice point
    assert _closed_subcomplex_count(sq) == 47
    regions = all_open_regions(sq)
    assert len(regions) == 31
    assert all(r.is_open() and r.lattice_points for r in regions)


def test_cone_membership():
    P = build_polytope(legendre().support())
    assert cone_membership(0, (0, 0), P)
    assert not cone_membership(0, (1, 0), P)
    assert cone_membership(2, (2, 2), P)
    assert not cone_membership(2, (1, 1), P)
    assert not cone_membership(-1, (0, 0), P)


def test_degenerate_inputs():
    with pytest.raises(ConfigurationError):
        build_polytope([])
    with pytest.raises(ConfigurationError):
        build_polytope([(0, 0), (1,)])
    seg = build_polytope([(0, 0), (2, 2)])
    assert seg.dimension == 1
    assert seg.lattice_points() == [(0, 0), (1, 1), (2, 2)]
