import pytest
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal import cartier, crystal
from dworkcrystal.cartier import (
    cartier_entries,
    default_pole_cap,
    digit_extract,
    frobenius_defect,
    tau_period,
    tau_rational,
    valuation_floor,
)
from dworkcrystal.errors import ConfigurationError
from dworkcrystal.fixtures import example_family, legendre, segment
from dworkcrystal.laurent import LaurentPoly, logarithmic_derivative_numerators, power
from dworkcrystal.polytope import all_open_regions, build_polytope, full_region, interior_region, level_region
from dworkcrystal.ring import BaseRing

Z = BaseRing.integers()
exps = st.tuples(st.integers(-2, 3), st.integers(-2, 3))
polys = st.dictionaries(exps, st.integers(-9, 9).filter(bool), min_size=1, max_size=4)


def test_digit_extraction_examples():
    h = LaurentPoly.from_terms([((3, 3), 1), ((2, 1), 1)], Z)
    assert digit_extract(h, 3) == LaurentPoly.from_terms([((1, 1), 1)], Z)
    one = LaurentPoly.constant(1, Z, 2)
    assert digit_extract(one, 5) == one


@given(polys, polys, st.sampled_from([3, 5]))
def test_digit_extraction_pulls_out_frobenius_images(a, b, p):
    g = LaurentPoly.from_terms(list(a.items()), Z, 2)
    h = LaurentPoly.from_terms(list(b.items()), Z, 2)
    assert digit_extract(g.dilate(p) * h, p) == g * digit_extract(h, p)


@given(polys, st.sampled_from([3, 5, 7]))
def test_frobenius_defect_divides_exactly(a, p):
    f = LaurentPoly.from_terms(list(a.items()), Z, 2)
    diff = f.dilate(p) - power(f, p)
    G = frobenius_defect(f, p, 2)
    for e, c in diff.terms.items():
        assert c % p == 0
        assert (c // p - G.coefficient(e)) % p**2 == 0


def test_valuation_floor_and_pole_cap():
    assert [valuation_floor(3, v0) for v0 in range(1, 6)] == [0, 1, 1, 2, 2]
    assert valuation_floor(5, 2) == 1
    for p, s in [(3, 1), (3, 2), (3, 3), (5, 2), (7, 3)]:
        cap = default_pole_cap(p, s)
        assert valuation_floor(p, cap + 1) >= s
        assert cap == 1 or valuation_floor(p, cap) < s
    assert default_pole_cap(3, 2) == 3
    assert default_pole_cap(5, 1) == 1
    assert valuation_floor(3, default_pole_cap(3, 3) + 1) >= 3
    with pytest.raises(ConfigurationError):
        default_pole_cap(2, 1)


def test_segment_table():
    table = cartier_entries(segment(), 1, (1,), 3, 2, pole_cap=3)
    assert table.pole_cap == 3
    assert all(v0 >= 1 for v0, _ in table.entries)
    for (v0, v), _ in table.entries.items():
        if v0 == 2:
            assert table.valuation(v0, v) >= 1
    # x/(1-x) is fixed by digit extraction, so only F_{(1;1),(1;1)} survives
    assert int(table.entry(1, (1,))) == 1
    nonzero = {k for k, c in table.entries.items() if not table.ring.is_zero(c)}
    assert nonzero == {(1, (1,))}


def test_no_entries_below_minimal_pole_order():
    f = legendre(2)
    table = cartier_entries(f, 7, (7, 7), 3, 1, pole_cap=4)
    assert min(v0 for v0, _ in table.entries) >= 3


def test_periods_of_first_order_forms():
    f = legendre(3)
    pts = build_polytope(f.support()).lattice_points()
    region = full_region(build_polytope(f.support()))
    for m in (1, 2, 5):
        B = crystal.BetaSystem(f, region, None, None).beta(m)
        for i, u in enumerate(region.lattice_points):
            for j, v in enumerate(region.lattice_points):
                tau = tau_period(f, 1, u, 1, v, m)
                assert tau == B[i, j]
                if m == 1:
                    assert tau == (1 if u == v else 0)
    assert len(pts) == 5


@given(polys, st.integers(2, 6), st.integers(1, 2))
def test_periods_of_derivatives_vanish_mod_m(a, m, which):
    # x_i d/dx_i (g / f) = (x_i g_i f - g x_i f_i) / f^2
    f = legendre(2)
    g = LaurentPoly.from_terms(list(a.items()), Z, 2)
    P = build_polytope(f.support())
    gi = logarithmic_derivative_numerators(g)[which]
    fi = logarithmic_derivative_numerators(f)[which]
    numerator = gi * f - g * fi
    for v0 in (1, 2):
        for v in P.scaled_lattice_points(v0):
            assert tau_rational(f, numerator, 2, v0, v, m) % m == 0


@pytest.mark.parametrize("p", [3, 5])
def test_mod_p_agreement_legendre_interior(p, legendre_symbolic):
    region = interior_region(build_polytope(legendre_symbolic.support()))
    r = cartier.verify_cartier_mod_p(legendre_symbolic, region, p, series_cap=12)
    assert r.ok, r.witnesses


def test_mod_p_agreement_level_region():
    f = example_family()
    region = level_region(build_polytope(f.support()), 1)
    r = cartier.verify_cartier_mod_p(f, region, 3, series_cap=12)
    assert r.ok, r.witnesses


def test_mod_p_agreement_every_open_region():
    f = legendre(2)
    for region in all_open_regions(build_polytope(f.support())):
        assert cartier.verify_cartier_mod_p(f, region, 5).ok, region.name


def test_mutated_table_is_caught():
    f = legendre(2)
    region = interior_region(build_polytope(f.support()))

    def bump(u, table):
        key = (1, (1, 1))
        entries = dict(table.entries)
        entries[key] = table.ring.add(entries.get(key, table.ring.zero), table.ring.one)
        return type(table)(table.source, entries, table.pole_cap, table.prime, table.precision, table.ring)

    assert not cartier.verify_cartier_mod_p(f, region, 5, tamper=bump).ok


@pytest.mark.parametrize("p", [3, 5, 7])
def test_valuation_bound(p):
    r = cartier.verify_cartier_valuations(legendre(2), p, 2, pole_cap=5)
    assert r.ok, r.witnesses


def test_period_compatibility_legendre_m9():
    f = legendre(2)
    P = build_polytope(f.support())
    samples = [(1, u, 1, v, 1) for u in P.lattice_points() for v in P.lattice_points()]
    r = cartier.verify_cartier_period_compat(f, 3, 2, samples)
    assert r.ok, r.witnesses
    assert r.checks == 25


def test_period_compatibility_segment():
    assert cartier.verify_cartier_period_compat(segment(), 3, 2).ok


@pytest.mark.parametrize("f,b", [(segment(), (0,)), (legendre(2), (0, 2))])
def test_cartier_matrix_acts_on_expansions(f, b):
    P = build_polytope(f.support())
    for u in P.lattice_points()[:3]:
        r = cartier.verify_cartier_on_expansion(f, 1, u, 3, 2, b, 12)
        assert r.ok, r.witnesses
