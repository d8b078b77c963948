import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal.fixtures import legendre
from dworkcrystal.laurent import (
    LaurentPoly,
    PowerCache,
    _sparse_mul,
    kronecker_multiply,
    logarithmic_derivative_numerators,
    multiply,
    naive_power,
    power,
)
from dworkcrystal.ring import BaseRing

exps = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
polys = st.dictionaries(exps, st.integers(-20, 20).filter(bool), min_size=1, max_size=5)


def make(terms, ring):
    return LaurentPoly.from_terms(list(terms.items()), ring, 2)


@given(polys, st.integers(0, 12), st.sampled_from([(3, 2), (5, 2), (7, 1), (3, 4)]))
def test_binary_power_matches_naive(terms, e, ps):
    R = BaseRing.residues(*ps)
    f = make(terms, R)
    assert power(f, e) == naive_power(f, e)


@given(polys, polys)
def test_dense_and_sparse_products_agree(a, b):
    R = BaseRing.residues(5, 3)
    f, g = make(a, R), make(b, R)
    assert multiply(f, g) == _sparse_mul(f, g)


def test_kronecker_kernel_against_numpy_convolution():
    rng = np.random.default_rng(1)
    A = rng.integers(0, 125, size=(4, 5))
    B = rng.integers(0, 125, size=(3, 2))
    full = np.zeros((6, 6), dtype=object)
    for i in range(4):
        for j in range(5):
            full[i : i + 3, j : j + 2] += A[i, j] * B.astype(object)
    got = kronecker_multiply(A, B, 125)
    assert np.array_equal(np.asarray(got, dtype=object) % 125, full % 125)


def test_power_cache_selected_coefficients():
    f = legendre(2).change_ring(BaseRing.residues(5, 2))
    cache = PowerCache(f)
    full = naive_power(f, 24)
    targets = [(k, k) for k in range(0, 30)] + [(3, 10), (0, 48)]
    got = cache.coefficients(24, targets)
    for t in targets:
        assert got[t] == full.coefficient(t)


@given(polys)
def test_cartier_of_dilation_is_identity(terms):
    f = make(terms, BaseRing.integers())
    assert f.dilate(5).cartier(5) == f


@given(polys, polys)
def test_cartier_pulls_out_p_th_powers(a, b):
    # C(g(x^p) h) = g C(h)
    R = BaseRing.integers()
    g, h = make(a, R), make(b, R)
    assert (g.dilate(3) * h).cartier(3) == g * h.cartier(3)


def test_log_derivative_numerators_are_euler_operators():
    f = legendre(2)
    f0, fx, fy = logarithmic_derivative_numerators(f)
    assert f0 == f
    assert fx.coefficient((3, 0)) == -3 and fy.coefficient((0, 2)) == 2


def test_symbolic_specialization():
    f = legendre()
    assert f.specialize(3).change_ring(BaseRing.integers()) == legendre(3)
