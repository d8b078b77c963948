from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal import fgl
from dworkcrystal.errors import ConfigurationError
from dworkcrystal.fgl import MultiSeries, fgl_group_law, fgl_inverse, fgl_logarithm, multiplicative_law
from dworkcrystal.fixtures import legendre, simplex
from dworkcrystal.polytope import build_polytope, interior_region, one_vertex_region


def _bump(at):
    def tamper(m, M):
        if m != at:
            return M
        rows = [list(r) for r in M.rows]
        rows[0][0] = rows[0][0] + 1
        return type(M)(rows, M.labels)

    return tamper


@pytest.fixture(scope="module")
def one_vertex():
    f = simplex()
    return f, one_vertex_region(build_polytope(f.support()), (0, 0))


def test_one_vertex_logarithm_is_minus_log(one_vertex):
    f, region = one_vertex
    log = fgl_logarithm(f, region, 3, 8)
    (comp,) = log.components
    assert comp.terms == {(m,): (Fraction(1, m),) for m in range(1, 9)}


def test_multiplicative_law_reproduced(one_vertex):
    f, region = one_vertex
    G = fgl_group_law(fgl_logarithm(f, region, 3, 8))
    assert G[0] == multiplicative_law(8)


def test_inverse_composes_to_identity():
    f = legendre(2)
    region = interior_region(build_polytope(f.support()))
    log = fgl_logarithm(f, region, 5, 7)
    inv = fgl_inverse(log)
    z = [MultiSeries.variable(0, 1, 7)]
    assert log(inv) == z
    assert [c.compose(log.components) for c in inv] == z


def test_axioms_hold():
    f = legendre(3)
    region = interior_region(build_polytope(f.support()))
    assert fgl.verify_fgl_axioms(fgl_logarithm(f, region, 5, 6)).ok


@pytest.mark.parametrize("p", [3, 5])
def test_symbolic_legendre_integrality(legendre_symbolic, p):
    region = interior_region(build_polytope(legendre_symbolic.support()))
    G = fgl_group_law(fgl_logarithm(legendre_symbolic, region, p, p + 2))
    r = fgl.verify_fgl_integrality(G, p)
    assert r.ok, r.witnesses[:3]
    assert r.details["minimal_valuation"] == 0


def test_logarithm_itself_is_not_integral(legendre_symbolic):
    # the coefficients of l carry 1/m; only the group law is integral
    region = interior_region(build_polytope(legendre_symbolic.support()))
    log = fgl_logarithm(legendre_symbolic, region, 3, 5)
    assert not fgl.verify_fgl_integrality(log.components, 3).ok


def test_corrupted_hasse_witt_breaks_integrality():
    f = legendre(2)
    region = interior_region(build_polytope(f.support()))
    good = fgl_group_law(fgl_logarithm(f, region, 3, 9))
    assert fgl.verify_fgl_integrality(good, 3).ok
    bad = fgl.verify_fgl_integrality(fgl_group_law(fgl_logarithm(f, region, 3, 9, tamper=_bump(3))), 3)
    assert not bad.ok
    # the degree-p coefficient is integral whatever beta_p is; the failure shows up at p^2
    assert min(w["degree"] for w in bad.witnesses) == 9


@pytest.mark.parametrize("p", [3, 5])
def test_functional_equation(legendre_symbolic, p):
    region = interior_region(build_polytope(legendre_symbolic.support()))
    r = fgl.verify_functional_equation(legendre_symbolic, region, p, p + 2, 12)
    assert r.ok, r.witnesses


def test_functional_equation_detects_corruption():
    f = legendre(3)
    region = interior_region(build_polytope(f.support()))
    assert fgl.verify_functional_equation(f, region, 5, 7).ok
    assert not fgl.verify_functional_equation(f, region, 5, 7, tamper=_bump(5)).ok


def test_degree_must_be_positive(one_vertex):
    with pytest.raises(ConfigurationError):
        fgl_logarithm(*one_vertex, 3, 0)


coeffs = st.lists(st.fractions(max_denominator=5).map(lambda q: (q,)), min_size=3, max_size=3)


def _series(cs):
    terms = {(1, 0): cs[0], (0, 1): cs[1], (1, 1): cs[2]}
    return MultiSeries({e: c for e, c in terms.items() if c[0]}, 2, 5)


@given(coeffs, coeffs, coeffs, coeffs)
def test_composition_is_a_ring_map(a, b, s1, s2):
    x, y = _series(a), _series(b)
    subs = [_series(s1), _series(s2)]
    assert (x * y).compose(subs) == x.compose(subs) * y.compose(subs)
    assert (x + y).compose(subs) == x.compose(subs) + y.compose(subs)
