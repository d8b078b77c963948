"""Matrix entries of the Cartier operator on the forms x^u / f^{u_0}, and period functionals.

With pG = f^sigma(x^p) - f^p and c = ceil(u_0 / p),

    F_{u,v} = (p^r / r!) ((u_0 - 1)! / (c - 1)!) [x^v] C(G^r x^u f^{pc - u_0}),   r = v_0 - c,

and F_{u,v} = 0 for v_0 < c.  Entries with large v_0 are divisible by a
growing power of p, which is what makes truncation at a finite pole order
legitimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, factorial
from typing import Callable, Iterable, Sequence

from .crystal import BetaSystem, default_series_cap
from .errors import ConfigurationError, PrecisionShortfall, PreconditionFailed
from .laurent import LaurentPoly, PowerCache, _dense_ok, power
from .polytope import Region, build_polytope, full_region
from .report import Report
from .ring import BaseRing, congruent, padic_fraction, p_valuation

Point = tuple[int, ...]
ConePoint = tuple[int, Point]


def valuation_floor(p: int, v0: int) -> int:
    """Certified lower bound ceil((p-2)(v0-1)/(p-1)) for ord_p F_{u,v}."""
    return max(0, ceil((p - 2) * (v0 - 1) / (p - 1)))


def default_pole_cap(p: int, s: int, start: int = 1) -> int:
    """Smallest cap >= start whose discarded entries (v_0 > cap) all vanish mod p^s."""
    _check_prime(p)
    cap = max(start, 1)
    while valuation_floor(p, cap + 1) < s:
        cap += 1
    return cap


def _check_prime(p: int) -> None:
    if p == 2:
        raise ConfigurationError("p = 2 is not supported for Cartier entries", prime=p)
    if p < 2:
        raise ConfigurationError("invalid prime", prime=p)


def digit_extract(poly: LaurentPoly, p: int) -> LaurentPoly:
    """C(sum a_k x^k) = sum a_{pk} x^k."""
    return poly.cartier(p)


@dataclass
class CartierEntryTable:
    """One row u of the Cartier matrix, for pole orders up to ``pole_cap``."""

    source: ConePoint
    entries: dict[ConePoint, object]
    pole_cap: int
    prime: int
    precision: int
    ring: BaseRing = field(repr=False, default=None)

    def entry(self, v0: int, v: Sequence[int]):
        """F_{u,v} as a ring element; zero outside the retained range."""
        key = (v0, tuple(v))
        raw = self.entries.get(key, self.ring.zero)
        return self.ring.to_element(raw)

    def valuation(self, v0: int, v: Sequence[int]) -> int:
        x = self.entries.get((v0, tuple(v)), self.ring.zero)
        return _raw_valuation(x, self.ring)

    def by_order(self, v0: int) -> dict[Point, object]:
        return {v: c for (w0, v), c in self.entries.items() if w0 == v0}

    def to_dict(self) -> dict:
        return {
            "source": {"pole_order": self.source[0], "exponent": list(self.source[1])},
            "pole_cap": self.pole_cap,
            "modulus": f"{self.prime}^{self.precision}",
            "entries": [
                {
                    "pole_order": v0,
                    "exponent": list(v),
                    "value": self.ring.to_element(c),
                    "valuation": _raw_valuation(c, self.ring),
                    "valuation_floor": valuation_floor(self.prime, v0),
                }
                for (v0, v), c in sorted(self.entries.items())
            ],
        }


def _raw_valuation(x, ring: BaseRing) -> int:
    """p-adic valuation of a raw element (the minimum over t-coefficients), capped at the precision."""
    s = ring.precision
    vals = x if ring.param else (x,)
    out = s
    for c in vals:
        if c:
            out = min(out, p_valuation(c, ring.prime, s))
    return out


def frobenius_defect(f: LaurentPoly, p: int, s: int, series_cap: int | None = None) -> LaurentPoly:
    """G = (f^sigma(x^p) - f^p) / p mod p^s.

    The difference is computed one digit further and divided exactly; a
    coefficient not divisible by p would mean sigma is not a Frobenius lift.
    """
    cap = default_series_cap(f, series_cap)
    R1 = BaseRing(p, s + 1, f.ring.param, cap)
    Rs = BaseRing(p, s, f.ring.param, cap)
    g = f.change_ring(R1)
    diff = g.frobenius_image() - power(g, p)
    out = {}
    for e, c in diff.terms.items():
        try:
            out[e] = R1.exact_divide(c, p)
        except ArithmeticError:
            raise PreconditionFailed("f^sigma(x^p) - f^p is not divisible by p", exponent=e) from None
    return LaurentPoly(out, R1, f.nvars).change_ring(Rs)


def cartier_entries(
    f: LaurentPoly,
    u0: int,
    u: Sequence[int],
    p: int,
    s: int,
    pole_cap: int | None = None,
    series_cap: int | None = None,
    defect: LaurentPoly | None = None,
) -> CartierEntryTable:
    """F_{u,v} mod p^s for all v with ceil(u_0/p) <= v_0 <= pole_cap."""
    _check_prime(p)
    u = tuple(u)
    P = build_polytope(f.support())
    if u0 < 1 or not P.contains(u, u0):
        raise ConfigurationError("source must lie in the cone over Delta with positive pole order", u0=u0, u=u)
    c = -(-u0 // p)
    if pole_cap is None:
        pole_cap = default_pole_cap(p, s, c)
    elif valuation_floor(p, pole_cap + 1) < s:
        raise PrecisionShortfall(
            "pole cap too small to certify the discarded entries",
            pole_cap=pole_cap,
            needed=default_pole_cap(p, s, 1),
            precision=s,
        )
    cap = default_series_cap(f, series_cap)
    R = BaseRing(p, s, f.ring.param, cap)
    G = defect if defect is not None else frobenius_defect(f, p, s, series_cap)
    fr = f.change_ring(R)
    W = LaurentPoly.monomial(u, R, R.one) * power(fr, p * c - u0)
    entries: dict[ConePoint, object] = {}
    lead = factorial(u0 - 1)
    lead_den = factorial(c - 1)
    for r in range(0, pole_cap - c + 1):
        v0 = c + r
        scalar = padic_fraction(p**r * lead, factorial(r) * lead_den, p, s).value
        Q = digit_extract(W, p)
        for v in P.scaled_lattice_points(v0):
            entries[(v0, v)] = R.zero
        for v, coeff in Q.terms.items():
            if (v0, v) not in entries:
                raise ConfigurationError("Cartier image left the scaled polytope", v0=v0, v=v)
            entries[(v0, v)] = R.scale(coeff, scalar)
        if r < pole_cap - c:
            W = W * G
    return CartierEntryTable((u0, u), entries, pole_cap, p, s, R)


# ---------------------------------------------------------------------------- period functionals


def tau_rational(f: LaurentPoly, numerator: LaurentPoly, pole: int, v0: int, v: Sequence[int], m: int):
    """Constant term of f^{m v_0} x^{-m v} numerator / f^pole, for m v_0 >= pole."""
    k = m * v0 - pole
    if k < 0:
        raise ConfigurationError("pole order exceeds m*v0; the product is not a Laurent polynomial", pole=pole, m=m, v0=v0)
    target = tuple(m * x for x in v)
    prod = numerator * power(f, k)
    return prod.coefficient(target)


def tau_period(f: LaurentPoly, u0: int, u: Sequence[int], v0: int, v: Sequence[int], m: int = 1):
    """tau_{mv}(omega_u) = (u_0 - 1)! [x^{mv - u}] f^{m v_0 - u_0} (raw element of f's ring)."""
    k = m * v0 - u0
    if k < 0:
        raise ConfigurationError("pole order exceeds m*v0; the product is not a Laurent polynomial", u0=u0, m=m, v0=v0)
    R = f.ring
    target = tuple(m * b - a for a, b in zip(u, v))
    return R.scale(power(f, k).coefficient(target), factorial(u0 - 1))


# ---------------------------------------------------------------------------- verifiers

TableTamper = Callable[[Point, CartierEntryTable], CartierEntryTable]


def verify_cartier_mod_p(
    f: LaurentPoly,
    region: Region,
    p: int,
    confinement_precision: int = 2,
    pole_cap: int | None = None,
    series_cap: int | None = None,
    tamper: TableTamper | None = None,
) -> Report:
    """Compare the Cartier row of each u in the region with the Hasse-Witt row.

    Entries with v_0 = 1 must agree with beta_p mod p and the others must
    vanish mod p.  Entries outside the cone over the region must vanish
    outright; that is checked mod p^confinement_precision.
    """
    _check_prime(p)
    S = max(1, confinement_precision)
    cap = default_series_cap(f, series_cap)
    P = region.parent
    full = full_region(P)
    system = BetaSystem(f, full, p, 1, cap)
    hw = system.beta(p)
    index = {v: j for j, v in enumerate(full.lattice_points)}
    G = frobenius_defect(f, p, S, series_cap)
    report = Report("cartier-mod-p", p, 1, p, region.name)
    report.details["confinement_precision"] = S
    for u in region.lattice_points:
        table = cartier_entries(f, 1, u, p, S, pole_cap, series_cap, defect=G)
        if tamper is not None:
            table = tamper(u, table)
        report.details.setdefault("pole_cap", table.pole_cap)
        i = index[u]
        for (v0, v), raw in sorted(table.entries.items()):
            val = table.ring.to_element(raw)
            if v0 == 1:
                want = hw[i, index[v]]
                report.checks += 1
                if not congruent(val.reduce(1) if S > 1 else val, want, 1):
                    report.fail(kind="hasse-witt", u=list(u), v0=v0, v=list(v), entry=val, expected=want)
            else:
                report.checks += 1
                if not congruent(val, val.zero_like(), 1):
                    report.fail(kind="higher-pole", u=list(u), v0=v0, v=list(v), entry=val)
            if not region.contains(v, v0):
                report.checks += 1
                if not congruent(val, val.zero_like(), S):
                    report.fail(kind="support", u=list(u), v0=v0, v=list(v), entry=val)
    return report


def verify_cartier_valuations(
    f: LaurentPoly,
    p: int,
    s: int,
    pole_cap: int | None = None,
    sources: Iterable[ConePoint] | None = None,
    series_cap: int | None = None,
    tamper: TableTamper | None = None,
) -> Report:
    """ord_p F_{u,v} >= ceil((p-2)(v_0-1)/(p-1)) for every computed entry."""
    _check_prime(p)
    P = build_polytope(f.support())
    if sources is None:
        sources = [(1, u) for u in P.lattice_points()] + [(2, u) for u in P.scaled_lattice_points(2)]
    G = frobenius_defect(f, p, s, series_cap)
    report = Report("cartier-valuation-bound", p, s, None, None)
    for u0, u in sources:
        table = cartier_entries(f, u0, u, p, s, pole_cap, series_cap, defect=G)
        if tamper is not None:
            table = tamper(tuple(u), table)
        report.details.setdefault("pole_cap", table.pole_cap)
        for (v0, v), raw in sorted(table.entries.items()):
            floor = min(valuation_floor(p, v0), s)
            got = _raw_valuation(raw, table.ring)
            report.checks += 1
            if got < floor:
                report.fail(u0=u0, u=list(u), v0=v0, v=list(v), valuation=got, bound=floor)
    return report


def default_period_samples(f: LaurentPoly, p: int, limit: int = 12) -> list[tuple]:
    """(u0, u, v0, v, m') tuples with small pole orders and m' = 1."""
    P = build_polytope(f.support())
    out = []
    for u0 in (1, 2):
        for u in P.scaled_lattice_points(u0):
            for v in P.lattice_points():
                out.append((u0, u, 1, v, 1))
    return out[:limit]


def verify_cartier_period_compat(
    f: LaurentPoly,
    p: int,
    s: int,
    samples: Iterable[Sequence] | None = None,
    pole_cap: int | None = None,
    series_cap: int | None = None,
    tamper: TableTamper | None = None,
) -> Report:
    """tau_{mv}(omega_u) == sum_w F_{u,w} tau^sigma_{(m/p)v}(omega^sigma_w) mod p^s with m = p^s m'.

    The w-sum runs over pole orders up to K = min(pole cap, (m/p) v_0); the
    omitted entries have valuation >= ceil((p-2)K/(p-1)), which must reach s.
    """
    _check_prime(p)
    samples = list(samples) if samples is not None else default_period_samples(f, p)
    cap = default_series_cap(f, series_cap)
    R = BaseRing(p, s, f.ring.param, cap)
    fr = f.change_ring(R)
    fs = fr.sigma()
    G = frobenius_defect(f, p, s, series_cap)
    cache_f = PowerCache(fr) if _dense_ok(R) and len(fr) > 1 else None
    cache_s = PowerCache(fs) if _dense_ok(R) and len(fs) > 1 else None
    tables: dict[ConePoint, CartierEntryTable] = {}
    report = Report("cartier-period-compatibility", p, s, None, None)

    def coeff(cache, poly, k, target):
        if cache is None:
            return power(poly, k).coefficient(target)
        return cache.coefficients(k, [target])[target]

    for u0, u, v0, v, mp in samples:
        u, v = tuple(u), tuple(v)
        m = p**s * mp
        k_low = (m // p) * v0
        K = k_low if pole_cap is None else min(pole_cap, k_low)
        if valuation_floor(p, K + 1) < s:
            raise PrecisionShortfall("the truncated w-sum cannot be certified", K=K, precision=s)
        key = (u0, u)
        if key not in tables:
            table = cartier_entries(f, u0, u, p, s, max(K, -(-u0 // p)), series_cap, defect=G)
            if tamper is not None:
                table = tamper(u, table)
            tables[key] = table
        table = tables[key]
        if m * v0 < u0:
            raise ConfigurationError("pole order exceeds m*v0", u0=u0, m=m, v0=v0)
        lhs = R.scale(coeff(cache_f, fr, m * v0 - u0, tuple(m * b - a for a, b in zip(u, v))), factorial(u0 - 1))
        rhs = R.zero
        for (w0, w), F in table.entries.items():
            if w0 > K or R.is_zero(F):
                continue
            target = tuple((m // p) * b - a for a, b in zip(w, v))
            tau = R.scale(coeff(cache_s, fs, k_low - w0, target), factorial(w0 - 1))
            rhs = R.add(rhs, R.mul(F, tau))
        report.checks += 1
        if lhs != rhs:
            report.fail(u0=u0, u=list(u), v0=v0, v=list(v), m=m, lhs=R.to_element(lhs), rhs=R.to_element(rhs))
    return report


def verify_cartier_on_expansion(
    f: LaurentPoly,
    u0: int,
    u: Sequence[int],
    p: int,
    s: int,
    b: Sequence[int],
    degree_bound: int,
    pole_cap: int | None = None,
    series_cap: int | None = None,
    tamper: TableTamper | None = None,
) -> Report:
    """Digit extraction of the expansion of omega_u at b equals sum_v F_{u,v} (expansion of omega^sigma_v).

    This is the coefficientwise form of C(omega_u) = sum F_{u,v} omega^sigma_v,
    checked on all exponents of grade <= degree_bound.
    """
    from .expansion import GeometricSeries, expand_with, vertex_grading

    _check_prime(p)
    u = tuple(u)
    table = cartier_entries(f, u0, u, p, s, pole_cap, series_cap)
    if tamper is not None:
        table = tamper(u, table)
    R = table.ring
    P = build_polytope(f.support())
    fr = f.change_ring(R)
    b = tuple(b)
    psi = vertex_grading(P, b)
    dot = lambda a, c: sum(x * y for x, y in zip(a, c))
    # window: exponents k with psi(k) <= degree_bound on the extracted side
    big = GeometricSeries(fr, P, b, max(0, p * degree_bound - dot(psi, u) + u0 * dot(psi, b)))
    small = GeometricSeries(fr.sigma(), P, b, max(0, degree_bound - min(dot(psi, v) - v0 * dot(psi, b) for (v0, v) in table.entries)))
    src = expand_with(big, LaurentPoly.monomial(u, R, R.scale(R.one, factorial(u0 - 1))), u0)
    lhs = {}
    for k, c in src.coefficients.items():
        if all(x % p == 0 for x in k):
            lhs[tuple(x // p for x in k)] = c
    rhs: dict = {}
    for (v0, v), F in table.entries.items():
        if R.is_zero(F):
            continue
        ex = expand_with(small, LaurentPoly.monomial(v, R, R.scale(R.one, factorial(v0 - 1))), v0)
        for k, c in ex.coefficients.items():
            rhs[k] = R.add(rhs.get(k, R.zero), R.mul(F, c))
    report = Report("cartier-on-expansion", p, s, None, None)
    report.details.update(source=[u0, list(u)], base_vertex=list(b), degree_bound=degree_bound, pole_cap=table.pole_cap)
    keys = {k for k in set(lhs) | set(rhs) if dot(psi, k) <= degree_bound}
    for k in sorted(keys):
        a, c = lhs.get(k, R.zero), rhs.get(k, R.zero)
        report.checks += 1
        if a != c:
            report.fail(exponent=list(k), lhs=R.to_element(a), rhs=R.to_element(c))
    return report
