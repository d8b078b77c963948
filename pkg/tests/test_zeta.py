from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal import zeta
from dworkcrystal.errors import ConfigurationError, NotAUnit, PreconditionFailed
from dworkcrystal.fixtures import example_family, legendre, segment, skew_square, square
from dworkcrystal.laurent import LaurentPoly
from dworkcrystal.ring import BaseRing, PAdicScalar

Z = BaseRing.integers()


@pytest.mark.parametrize("p,s", [(2, 3), (3, 2), (5, 2), (7, 1), (3, 4)])
def test_primitive_element_generates_the_field(p, s):
    K = zeta.FiniteField(p, s)
    assert sorted(K.exp.tolist()) == list(range(1, p**s))
    assert all(K.log[K.exp[k]] == k for k in range(p**s - 1))


def _gf_square_count(coeffs, p):
    """Zeros on the torus over F_{p^2} = F_p[w]/(w^2 - r), r a non-residue; pairs (a, b) mean a + b w."""
    r = next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)

    def mul(u, v):
        return ((u[0] * v[0] + r * u[1] * v[1]) % p, (u[0] * v[1] + u[1] * v[0]) % p)

    def pw(u, e):
        out = (1, 0)
        for _ in range(e):
            out = mul(out, u)
        return out

    nonzero = [(a, b) for a in range(p) for b in range(p) if (a, b) != (0, 0)]
    n = len(next(iter(coeffs)))
    count = 0
    for pt in product(nonzero, repeat=n):
        tot = (0, 0)
        for e, c in coeffs.items():
            term = (c % p, 0)
            for xi, ei in zip(pt, e):
                term = mul(term, pw(xi, ei % (p * p - 1)))
            tot = ((tot[0] + term[0]) % p, (tot[1] + term[1]) % p)
        count += tot == (0, 0)
    return count


polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-4, 4).filter(bool), min_size=2, max_size=4)


@given(polys, st.sampled_from([3, 5, 7]))
def test_prime_field_count_matches_naive(terms, p):
    f = LaurentPoly.from_terms(list(terms.items()), Z, 2)
    assert zeta.count_points(f, p, 1).hypersurface_count == zeta.count_points_naive(f, p)


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("f", [legendre(2), skew_square(), LaurentPoly.from_terms([((0, 0), 1), ((1, 0), -1), ((0, 1), -1)], Z)])
def test_extension_field_count_matches_independent_model(f, p):
    assert zeta.count_points(f, p, 2).hypersurface_count == _gf_square_count(dict(f.terms), p)


def test_small_counts():
    line = LaurentPoly.from_terms([((0, 0), 1), ((1, 0), -1), ((0, 1), -1)], Z)
    pc = zeta.count_points(line, 3, 1)
    assert (pc.hypersurface_count, pc.torus_count) == (1, 3)
    assert zeta.count_points(segment(), 5, 3).hypersurface_count == 1
    with pytest.raises(ConfigurationError):
        zeta.count_points(LaurentPoly.from_terms([((0, 0, 0, 0), 1), ((1, 1, 1, 1), 1)], Z), 11, 2)


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_elliptic_trace_against_affine_count(p):
    for z0 in range(2, p):
        assert zeta.elliptic_trace(z0, p) == zeta.elliptic_trace_naive(z0, p)
    with pytest.raises(PreconditionFailed):
        zeta.elliptic_trace(1, p)


def test_trace_congruence_segment():
    r = zeta.verify_trace_congruence(segment(), 3, 2)
    assert r.ok
    # 1 + #Z = 2 at every level
    assert r.details["hypersurface_counts"] == {1: 1, 2: 1}


@pytest.mark.parametrize("p", [3, 5])
def test_trace_congruence_square(p):
    assert zeta.verify_trace_congruence(square(), p, 2).ok


def test_trace_congruence_legendre_ordinary():
    assert zeta.verify_trace_congruence(legendre(2), 5, 2).ok


def test_trace_congruence_detects_corruption():
    def bump(m, M):
        if m != 5:
            return M
        rows = [list(r) for r in M.rows]
        rows[-1][-1] = rows[-1][-1] + 1
        return type(M)(rows, M.labels)

    assert not zeta.verify_trace_congruence(legendre(2), 5, 2, tamper=bump).ok


def test_supersingular_trace_is_skipped():
    assert zeta.elliptic_trace(2, 3) % 3 == 0
    r = zeta.verify_trace_congruence(legendre(2), 3, 2)
    assert r.status == "skipped"


def test_symbolic_family_needs_a_value():
    with pytest.raises(PreconditionFailed):
        zeta.verify_trace_congruence(example_family(), 3, 1)


def test_pochhammer_identity():
    assert zeta.check_pochhammer_identity(200)


@pytest.mark.parametrize("z0", [2, 3])
def test_unit_root_at_five(z0):
    r = zeta.verify_legendre_unit_root(z0, 5, 2)
    assert r.ok, r.witnesses
    lam = r.details["unit_root"]
    assert lam.value % 5 != 0
    assert zeta.verify_hypergeometric_stability(z0, 5, 2).ok


def test_unit_root_values():
    assert zeta.legendre_unit_root(2, 5, 2) == PAdicScalar(13, 2, 5)
    assert zeta.legendre_unit_root(3, 5, 2) == PAdicScalar(12, 2, 5)
    with pytest.raises(NotAUnit):
        zeta.legendre_unit_root(2, 3, 2)


@pytest.mark.parametrize("p,z0", [(7, 2), (11, 3), (7, 4)])
def test_unit_root_at_primes_three_mod_four(p, z0):
    try:
        r = zeta.verify_legendre_unit_root(z0, p, 2)
    except NotAUnit:
        pytest.skip("supersingular")
    assert r.status in ("pass", "skipped"), r.witnesses


def test_unit_root_tamper():
    def shift(kind, value):
        return value + 5 if kind == "lambda" else value

    assert not zeta.verify_legendre_unit_root(2, 5, 2, tamper=shift).ok


def test_series_ratio_example_family():
    r = zeta.verify_series_ratio(example_family(), zeta.quarter_series(40), 3, 2, point=(1, 1), series_cap=16)
    assert r.ok, r.witnesses
