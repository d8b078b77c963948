from math import comb

import pytest

from dworkcrystal import crystal
from dworkcrystal.crystal import BetaSystem
from dworkcrystal.errors import NotInvertibleModP
from dworkcrystal.fixtures import example_family, legendre, square
from dworkcrystal.laurent import naive_power
from dworkcrystal.polytope import build_polytope, full_region, interior_region, level_region
from dworkcrystal.ring import BaseRing, ParamSeries


def _poly(terms):
    return {k: c for k, c in terms.items() if c}


def f_closed(m):
    return _poly({k: comb(m - 1, 4 * k) * comb(4 * k, 2 * k) * comb(2 * k, k) for k in range(m)})


def g_closed(m):
    return _poly({k: comb(m - 1, 4 * k + 1) * comb(4 * k + 1, 2 * k) * comb(2 * k, k) for k in range(m)})


def h_closed(m):
    return _poly({k: comb(m - 1, 4 * k - 1) * comb(4 * k - 1, 2 * k) * comb(2 * k, k) for k in range(1, m)})


def _terms(x):
    return x.signed_terms() if hasattr(x, "signed_terms") else ({0: x} if x else {})


@pytest.fixture(scope="module")
def example_exact():
    f = example_family()
    region = full_region(build_polytope(f.support()))
    return BetaSystem(f, region, None, None)


def test_example_point_order(example_exact):
    assert example_exact.points == [(0, 2), (1, 0), (3, 0), (2, 0), (1, 1)]


@pytest.mark.parametrize("m", [3, 5, 7, 9, 11])
def test_example_closed_form(example_exact, m):
    B = example_exact.beta(m)
    h = h_closed(m)
    expected = [
        [{0: 1}, {}, {}, {}, h],
        [{}, {0: 1}, {}, {}, {k: c // 2 for k, c in h.items()}],
        [{}, {}, {m - 1: 1}, {}, {k - 1: c // 2 for k, c in h.items()}],
        [{}, {}, {}, {(m - 1) // 2: comb(m - 1, (m - 1) // 2)}, g_closed(m)],
        [{}, {}, {}, {}, f_closed(m)],
    ]
    got = [[_terms(B[i, j]) for j in range(5)] for i in range(5)]
    assert got == expected


def test_example_m5_literal_values(example_exact):
    B = example_exact.beta(5)
    assert _terms(B[4, 4]) == {0: 1, 1: 12}
    assert _terms(B[0, 4]) == {1: 24}
    assert _terms(B[3, 4]) == {0: 4}


def test_beta_matches_single_coefficient_oracle():
    f = legendre(3)
    R = BaseRing.residues(5, 2)
    region = full_region(build_polytope(f.support()))
    system = BetaSystem(f, region, 5, 2)
    fr = f.change_ring(R)
    for m in (1, 2, 5, 7):
        Fm = naive_power(fr, m - 1)
        B = system.beta(m)
        for i, u in enumerate(system.points):
            for j, v in enumerate(system.points):
                e = tuple(m * b - a for a, b in zip(u, v))
                assert int(B[i, j]) == Fm.coefficient(e)


def test_beta_congruence_symbolic_legendre(legendre_symbolic):
    region = interior_region(build_polytope(legendre_symbolic.support()))
    r = crystal.verify_beta_congruence(legendre_symbolic, region, 3, 2, (1, 2), 10)
    assert r.ok, r.witnesses


def test_delta_congruence_example(example_family):
    region = level_region(build_polytope(example_family.support()), 1)
    r = crystal.verify_delta_congruence(example_family, region, 3, 2, "theta", (1, 2), 10)
    assert r.ok, r.witnesses


def test_connection_entry_is_log_derivative(example_family):
    region = full_region(build_polytope(example_family.support()))
    N = crystal.n_delta(example_family, region, 5, 1, "theta", 12).matrix
    f5 = ParamSeries([1, 12], 5, 1, N[4, 4].cap)
    assert N[4, 4] == f5.derivative("theta") * f5.inverse()


def test_literal_rows_are_fixed(example_family):
    rows = [[1, 1, (0, 1), 0, 1], [2, 0, 0, 0, 1], [0, 1, (0, 3), 0, 1]]
    r = crystal.verify_fixed_rows(example_family, 3, 2, "theta", 12, extra_rows=rows)
    assert r.ok, r.witnesses
    assert r.details["rows"] == 6


def test_block_structure_example(example_family):
    r = crystal.block_decomposition(example_family, 3, 1, (3, 5), 12)
    assert r.ok, r.witnesses


def test_tampered_beta_is_detected():
    f = square()
    region = full_region(build_polytope(f.support()))

    def corrupt(m, M):
        if m != 9:
            return M
        rows = [list(r) for r in M.rows]
        rows[0][0] = rows[0][0] + 1
        return type(M)(rows, M.labels)

    assert crystal.verify_beta_congruence(f, region, 3, 2, (1,), None).ok
    assert not crystal.verify_beta_congruence(f, region, 3, 2, (1,), None, tamper=corrupt).ok


def test_supersingular_fiber_is_reported():
    f = legendre(2)
    region = interior_region(build_polytope(f.support()))
    assert not crystal.hasse_witt_invertible(f, region, 3)
    with pytest.raises(NotInvertibleModP):
        crystal.lambda_sigma(f, region, 3, 2)
