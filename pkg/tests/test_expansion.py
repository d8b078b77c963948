import pytest
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal import expansion
from dworkcrystal.errors import ConfigurationError, NotAUnit, PrecisionShortfall, PreconditionFailed
from dworkcrystal.expansion import cone_membership_shift, cone_samples, expand, is_formal_derivative_truncated, vertex_grading
from dworkcrystal.fixtures import example_family, legendre, segment, skew_square, square
from dworkcrystal.laurent import LaurentPoly, logarithmic_derivative_numerators
from dworkcrystal.polytope import build_polytope, full_region, interior_region
from dworkcrystal.ring import BaseRing

Z = BaseRing.integers()
ONE2 = LaurentPoly.constant(1, Z, 2)


def x(*e):
    return LaurentPoly.monomial(e, Z)


def test_geometric_series():
    ex = expand(segment(), LaurentPoly.constant(1, Z, 1), 1, (0,), 15)
    assert [ex.coefficient((k,)) for k in range(16)] == [1] * 16
    with pytest.raises(PrecisionShortfall):
        ex.coefficient((16,))


def test_shifted_geometric_series():
    ex = expand(segment(), x(1), 1, (0,), 10)
    assert ex.coefficient((0,)) == 0
    assert all(ex.coefficient((k,)) == 1 for k in range(1, 11))


def test_double_pole_gives_linear_coefficients():
    ex = expand(segment(), x(1), 2, (0,), 12)
    assert [ex.coefficient((k,)) for k in range(13)] == list(range(13))
    assert is_formal_derivative_truncated(ex).ok
    plain = expand(segment(), LaurentPoly.constant(1, Z, 1), 1, (0,), 12)
    r = is_formal_derivative_truncated(plain, 3, 2)
    assert not r.ok
    # k = 0 has gcd 0, so a nonzero constant term is a violation too
    assert {w["exponent"][0] for w in r.witnesses} == {0, 3, 6, 9, 12}


def test_product_of_geometric_series():
    ex = expand(square(), ONE2, 1, (0, 0), 10)
    for k in ex.window():
        assert ex.coefficient(k) == (-1) ** sum(k)
    assert len(ex.window()) == 66


def test_expansion_over_residues():
    ex = expand(skew_square(), x(1, 0), 1, (0, 0), 6, p=5, s=2)
    exact = expand(skew_square(), x(1, 0), 1, (0, 0), 6)
    for k in exact.window():
        assert (exact.coefficient(k) - ex.coefficient(k)) % 25 == 0


def test_vertex_grading_is_positive_on_edges():
    P = build_polytope(legendre().support())
    for b in P.vertices:
        psi = vertex_grading(P, b)
        for a in P.lattice_points():
            if a != b:
                assert sum(s * (ai - bi) for s, ai, bi in zip(psi, a, b)) > 0
    with pytest.raises(ConfigurationError):
        vertex_grading(P, (1, 1))


def test_non_unit_vertex_coefficient():
    f = legendre()  # coefficient of x at (1, 0) is -t
    with pytest.raises(NotAUnit):
        expand(f, ONE2.change_ring(f.ring), 1, (1, 0), 4, p=3, s=1, series_cap=8)


small = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), st.integers(-5, 5).filter(bool), min_size=1, max_size=3)


@given(small, small, st.integers(1, 2), st.integers(1, 2))
def test_expansion_is_multiplicative(a, b, m1, m2):
    f = skew_square()
    g1 = LaurentPoly.from_terms(list(a.items()), Z, 2)
    g2 = LaurentPoly.from_terms(list(b.items()), Z, 2)
    e1 = expand(f, g1, m1, (0, 0), 16)
    e2 = expand(f, g2, m2, (0, 0), 16)
    e12 = expand(f, g1 * g2, m1 + m2, (0, 0), 6)
    for k in e12.window():
        total = 0
        for i, c in e1.coefficients.items():
            j = (k[0] - i[0], k[1] - i[1])
            if j in e2.coefficients:
                assert e1.known(i) and e2.known(j)
                total += c * e2.coefficients[j]
        assert total == e12.coefficient(k)


@given(small, st.integers(1, 2))
def test_expansions_of_derivatives_pass_the_criterion(a, which):
    f = skew_square()
    g = LaurentPoly.from_terms(list(a.items()), Z, 2)
    gi = logarithmic_derivative_numerators(g)[which]
    fi = logarithmic_derivative_numerators(f)[which]
    ex = expand(f, gi * f - g * fi, 2, (0, 0), 10)
    assert is_formal_derivative_truncated(ex).ok


def test_cone_samples_lie_in_the_cone():
    P = build_polytope(legendre().support())
    for b in P.vertices:
        ks = cone_samples(P, b, 12)
        assert len(ks) == 12
        assert all(cone_membership_shift(P, b, k) for k in ks)
    assert not cone_membership_shift(P, (0, 2), (1, 1))


@pytest.mark.parametrize("b", [(0, 2), (3, 0)])
def test_katz_legendre(legendre_symbolic, b):
    P = build_polytope(legendre_symbolic.support())
    ks = cone_samples(P, b, 5)
    r = expansion.verify_katz_congruences(legendre_symbolic, interior_region(P), b, 3, 2, ks, "theta", 10)
    assert r.ok, r.witnesses


def test_katz_example_full_region():
    f = example_family()
    P = build_polytope(f.support())
    r = expansion.verify_katz_congruences(f, full_region(P), (0, 2), 3, 2, cone_samples(P, (0, 2), 5), "theta", 10)
    assert r.ok, r.witnesses


def test_katz_tampered_vector():
    f = legendre(3)
    P = build_polytope(f.support())

    ks = cone_samples(P, (0, 2), 5)
    target = tuple(25 * c for c in ks[0])

    def corrupt(k, vec):
        # one entry of one expansion vector
        return [vec[0] + 1] + list(vec[1:]) if k == target else vec

    assert expansion.verify_katz_congruences(f, full_region(P), (0, 2), 5, 2, ks, "none").ok
    assert not expansion.verify_katz_congruences(f, full_region(P), (0, 2), 5, 2, ks, "none", tamper_vector=corrupt).ok


def test_bhs_square():
    P = build_polytope(square().support())
    r = expansion.verify_bhs(square(), ONE2, (0, 0), 3, 2, cone_samples(P, (0, 0), 10))
    assert r.ok and r.checks >= 10


def test_bhs_skew_square():
    P = build_polytope(skew_square().support())
    r = expansion.verify_bhs(skew_square(), x(1, 0), (0, 0), 5, 2, cone_samples(P, (0, 0), 10))
    assert r.ok, r.witnesses


def test_bhs_rejects_non_vertex_points():
    f = legendre(2)
    with pytest.raises(PreconditionFailed):
        expansion.verify_bhs(f, ONE2, (0, 2), 3, 1, [(1, -1)])
