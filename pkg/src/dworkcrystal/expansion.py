"""Formal expansion of rational functions g / f^m at a vertex b of the Newton polytope.

Writing f = f_b x^b (1 + H) with H supported in the cone over (Delta - b),

    g / f^m = g x^(-m b) f_b^(-m) (1 + H)^(-m),

and (1 + H)^(-1) is a well defined series because H only has exponents of
positive degree for a grading psi that is positive on the cone.  Coefficients
are exact below the requested degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from functools import reduce
from typing import Iterable, Sequence

from .crystal import BetaSystem, Tamper, _adaptive, default_series_cap
from .errors import ConfigurationError, NotAUnit, PreconditionFailed, PrecisionShortfall
from .laurent import LaurentPoly
from .polytope import NewtonPolytope, Region, build_polytope
from .report import Report
from .ring import BaseRing, ParamSeries, congruent, difference_valuation, p_valuation

Exponent = tuple[int, ...]


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vertex_grading(polytope: NewtonPolytope, b: Sequence[int]) -> tuple[int, ...]:
    """An integer functional psi with psi(a - b) > 0 for every point a != b of Delta.

    It is the sum of the inward normals of the facets through b.
    """
    b = tuple(b)
    if b not in polytope.vertices:
        raise ConfigurationError("expansion point must be a vertex", point=b)
    n = polytope.ambient_dimension
    psi = [0] * n
    for i in polytope.tight_facets(b):
        for j, x in enumerate(polytope.facets[i].normal):
            psi[j] -= x
    return tuple(psi)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


class GeometricSeries:
    """Coefficients of (1 + H)^(-1), and its powers, up to a psi-degree bound."""

    def __init__(self, f: LaurentPoly, polytope: NewtonPolytope, b: Sequence[int], degree_bound: int):
        R = f.ring
        self.ring = R
        self.b = tuple(b)
        self.psi = vertex_grading(polytope, b)
        self.degree_bound = degree_bound
        fb = f.coefficient(self.b)
        if R.is_zero(fb) or not R.is_unit(fb):
            raise NotAUnit("the coefficient of f at the expansion vertex is not a unit", vertex=self.b)
        self.fb = fb
        self.fb_inv = R.inverse(fb)
        self.h = {}
        for e, c in f.terms.items():
            if e != self.b:
                d = _sub(e, self.b)
                self.h[d] = R.mul(c, self.fb_inv)
        for d in self.h:
            if _dot(self.psi, d) <= 0:
                raise ConfigurationError("grading is not positive on the cone", direction=d)
        self._powers = {1: self._inverse()}

    def degree(self, k: Sequence[int]) -> int:
        return _dot(self.psi, k)

    def _cone_points(self) -> list[Exponent]:
        n = len(self.b)
        zero = (0,) * n
        seen = {zero}
        frontier = [zero]
        D = self.degree_bound
        while frontier:
            nxt = []
            for k in frontier:
                for d in self.h:
                    q = _add(k, d)
                    if q not in seen and self.degree(q) <= D:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return sorted(seen, key=lambda k: (self.degree(k), k))

    def _inverse(self) -> dict[Exponent, object]:
        R = self.ring
        out: dict[Exponent, object] = {}
        for k in self._cone_points():
            if not any(k):
                out[k] = R.one
                continue
            acc = R.zero
            for d, hd in self.h.items():
                prev = out.get(_sub(k, d))
                if prev is not None and not R.is_zero(prev):
                    acc = R.add(acc, R.mul(hd, prev))
            acc = R.neg(acc)
            if not R.is_zero(acc):
                out[k] = acc
        return out

    def _truncated_product(self, A: dict, B: dict) -> dict:
        R = self.ring
        D = self.degree_bound
        out: dict[Exponent, object] = {}
        Bd = sorted(B.items(), key=lambda kv: self.degree(kv[0]))
        for ka, ca in A.items():
            da = self.degree(ka)
            for kb, cb in Bd:
                if da + self.degree(kb) > D:
                    break
                k = _add(ka, kb)
                v = R.mul(ca, cb)
                out[k] = R.add(out[k], v) if k in out else v
        return {k: v for k, v in out.items() if not R.is_zero(v)}

    def power(self, m: int) -> dict[Exponent, object]:
        """(1 + H)^(-m) for m >= 0."""
        if m == 0:
            return {(0,) * len(self.b): self.ring.one}
        if m not in self._powers:
            self._powers[m] = self._truncated_product(self.power(m - 1), self._powers[1])
        return self._powers[m]


@dataclass
class VertexExpansion:
    """Coefficients of x^k in the expansion of g / f^m at vertex b.

    A coefficient at k is exact when ``grade(k) <= degree_bound``.
    """

    base_vertex: Exponent
    pole_order: int
    coefficients: dict[Exponent, object]
    ring: BaseRing
    grading: tuple[int, ...]
    degree_bound: int
    offset: int
    source: str = ""

    def grade(self, k: Sequence[int]) -> int:
        return _dot(self.grading, k) + self.offset

    def known(self, k: Sequence[int]) -> bool:
        return self.grade(k) <= self.degree_bound

    def coefficient(self, k: Sequence[int]):
        k = tuple(k)
        if not self.known(k):
            raise PrecisionShortfall("coefficient lies beyond the expansion bound", exponent=k, grade=self.grade(k), bound=self.degree_bound)
        return self.coefficients.get(k, self.ring.zero)

    def window(self) -> list[Exponent]:
        """All exponents with a known (possibly zero) coefficient and nonnegative grade, ordered by grade."""
        pts = {k for k in self.coefficients if self.known(k)}
        return sorted(pts, key=lambda k: (self.grade(k), k))

    def digit_extract(self, p: int) -> dict[Exponent, object]:
        return {tuple(x // p for x in k): c for k, c in self.coefficients.items() if all(x % p == 0 for x in k) and self.known(k)}

    def to_dict(self) -> dict:
        return {
            "base_vertex": list(self.base_vertex),
            "pole_order": self.pole_order,
            "degree_bound": self.degree_bound,
            "grading": list(self.grading),
            "coefficients": [{"exponent": list(k), "grade": self.grade(k), "value": self.ring.to_element(self.coefficients[k])} for k in self.window() if k in self.coefficients],
        }


def expand_with(series: GeometricSeries, g: LaurentPoly, m: int) -> VertexExpansion:
    """Expansion of g / f^m using a precomputed geometric series."""
    R = series.ring
    b = series.b
    psi = series.psi
    if g.is_zero():
        return VertexExpansion(b, m, {}, R, psi, series.degree_bound, 0)
    shift = tuple(-m * x for x in b)
    base = {_add(e, shift): c for e, c in g.terms.items()}
    low = min(_dot(psi, e) for e in base)
    fb_pow = R.one
    for _ in range(m):
        fb_pow = R.mul(fb_pow, series.fb_inv)
    Sm = series.power(m)
    out: dict[Exponent, object] = {}
    D = series.degree_bound
    for e, c in base.items():
        c = R.mul(c, fb_pow)
        extra = _dot(psi, e) - low
        for k, v in Sm.items():
            if series.degree(k) + extra > D:
                continue
            key = _add(e, k)
            val = R.mul(c, v)
            out[key] = R.add(out[key], val) if key in out else val
    out = {k: v for k, v in out.items() if not R.is_zero(v)}
    return VertexExpansion(b, m, out, R, psi, D, -low)


def expand(
    f: LaurentPoly,
    g: LaurentPoly,
    m: int,
    b: Sequence[int],
    degree_bound: int,
    p: int | None = None,
    s: int | None = None,
    series_cap: int | None = None,
) -> VertexExpansion:
    """Expansion of g / f^m at vertex b, exact up to grade ``degree_bound``.

    With ``p`` and ``s`` the coefficients are reduced mod p^s (and mod
    t^series_cap for parameter families); otherwise f's own ring is used.
    """
    if m < 0:
        raise ConfigurationError("pole order must be nonnegative", m=m)
    ring = f.ring
    if p is not None and s is not None:
        ring = BaseRing(p, s, f.ring.param, default_series_cap(f, series_cap))
    fr, gr = f.change_ring(ring), g.change_ring(ring)
    P = build_polytope(f.support())
    series = GeometricSeries(fr, P, b, degree_bound)
    return expand_with(series, gr, m)


# ---------------------------------------------------------------------------- derivative criterion


def is_formal_derivative_truncated(expansion: VertexExpansion, p: int | None = None, precision: int | None = None) -> Report:
    """a_k == 0 mod gcd(k) on the known window.

    At finite p-adic precision only the p-part of gcd(k), capped at p^s, can
    be certified; exact integer coefficients are checked against the full gcd.
    """
    R = expansion.ring
    p = p if p is not None else R.prime
    precision = precision if precision is not None else R.precision
    report = Report("formal-derivative", p, precision, None, None)
    for k in expansion.window():
        a = expansion.coefficient(k)
        g = reduce(gcd, (abs(x) for x in k), 0)
        report.checks += 1
        if precision is None:
            values = a if R.param else (a,)
            ok = all((c % g == 0) if g else c == 0 for c in values)
        else:
            e = precision if g == 0 else min(p_valuation(g, p), precision)
            q = p**e
            values = a if R.param else (a,)
            ok = all(c % q == 0 for c in values)
        if not ok:
            report.fail(exponent=list(k), coefficient=R.to_element(a) if R.modulus is not None else a, gcd=g)
    return report


# ---------------------------------------------------------------------------- Katz congruences


def katz_vector(series: GeometricSeries, points: Sequence[Exponent], k: Sequence[int]) -> list:
    """Coefficient of x^k in x^u / f for every u, as raw ring elements."""
    R = series.ring
    out = []
    for u in points:
        j = _add(_sub(k, u), series.b)
        if series.degree(j) > series.degree_bound:
            raise PrecisionShortfall("expansion bound too small", exponent=tuple(k), needed=series.degree(j), bound=series.degree_bound)
        out.append(R.mul(series.fb_inv, series._powers[1].get(j, R.zero)))
    return out


def cone_samples(polytope: NewtonPolytope, b: Sequence[int], count: int, max_scale: int = 4) -> list[Exponent]:
    """Lattice points of the cone over (Delta - b), excluding 0, in a deterministic order."""
    b = tuple(b)
    psi = vertex_grading(polytope, b)
    found = set()
    for scale in range(1, max_scale + 1):
        for x in polytope.scaled_lattice_points(scale):
            k = tuple(a - scale * c for a, c in zip(x, b))
            if any(k):
                found.add(k)
    ordered = sorted(found, key=lambda k: (_dot(psi, k), k))
    return ordered[:count]


def verify_katz_congruences(
    f: LaurentPoly,
    region: Region,
    b: Sequence[int],
    p: int,
    s_max: int,
    k_samples: Iterable[Sequence[int]],
    derivation: str = "theta",
    series_cap: int | None = None,
    degree_bound: int | None = None,
    tamper: Tamper | None = None,
    tamper_vector=None,
) -> Report:
    """a_{p^s k} == Lambda sigma(a_{p^(s-1) k}) and delta(a_{p^s k}) == N a_{p^s k} mod p^s.

    ``a_k`` is the vector of coefficients of x^k in x^u / f over the region's
    lattice points u.  ``tamper_vector(k, vector)`` may corrupt an
    expansion vector (mutation tests).
    """
    b = tuple(b)
    samples = [tuple(k) for k in k_samples]
    P = region.parent
    psi = vertex_grading(P, b)
    for k in samples:
        if not cone_membership_shift(P, b, k):
            raise ConfigurationError("sample is not in the cone over Delta - b", k=k)
    need = max(_dot(psi, _add(_sub(tuple(p**s_max * x for x in k), u), b)) for k in samples for u in region.lattice_points)
    D = max(need, degree_bound or 0)
    if degree_bound is not None and degree_bound < need:
        raise PrecisionShortfall("degree bound too small for the requested samples", needed=need, bound=degree_bound)
    cap = default_series_cap(f, series_cap)
    target = None if cap is None else cap - 1

    def run(system: BetaSystem):
        R = system.ring
        series = GeometricSeries(system.f, P, b, D)
        lam_top = system.frobenius_matrix(s_max)
        n_top = system.connection_matrix(s_max, derivation)
        report = Report("katz-congruences", p, list(range(1, s_max + 1)), None, region.name)
        report.details.update(base_vertex=list(b), samples=[list(k) for k in samples], degree_bound=D)
        tprec = [lam_top.min_cap(), n_top.min_cap()]
        cache = {}

        def vec(k):
            if k not in cache:
                v = [R.to_element(x) for x in katz_vector(series, system.points, k)]
                if tamper_vector is not None:
                    v = tamper_vector(k, v)
                cache[k] = v
            return cache[k]

        pts = system.points
        for k in samples:
            for s in range(1, s_max + 1):
                lam = system.reduced(lam_top, s)
                nd = system.reduced(n_top, s)
                hi = [x.reduce(s) if system.precision != s else x for x in vec(tuple(p**s * c for c in k))]
                lo = [x.reduce(s) if system.precision != s else x for x in vec(tuple(p ** (s - 1) * c for c in k))]
                lo_sigma = [x.frobenius() for x in lo]
                for i, u in enumerate(pts):
                    rhs = lam[i, 0] * lo_sigma[0]
                    conn = nd[i, 0] * hi[0]
                    for j in range(1, len(pts)):
                        rhs = rhs + lam[i, j] * lo_sigma[j]
                        conn = conn + nd[i, j] * hi[j]
                    dlhs = hi[i].derivative(derivation)
                    for kind, lhs, r in (("frobenius", hi[i], rhs), ("horizontality", dlhs, conn)):
                        report.checks += 1
                        if isinstance(r, ParamSeries):
                            tprec.append(min(c for c in (r.cap, getattr(lhs, "cap", None)) if c is not None) if r.cap is not None else None)
                        if not congruent(lhs, r, s):
                            report.fail(kind=kind, k=list(k), s=s, u=list(u), lhs=lhs, rhs=r, difference_valuation=difference_valuation(lhs, r, s))
        achieved = min((c for c in tprec if c is not None), default=None)
        report.details["t_precision"] = achieved
        return report, achieved

    return _adaptive(f, region, p, s_max, target, run, tamper)


def cone_membership_shift(P: NewtonPolytope, b: Sequence[int], k: Sequence[int]) -> bool:
    """k lies in the cone generated by Delta - b (the tangent cone at the vertex b)."""
    if any(_dot(a, k) != 0 for a, _ in P.equations):
        return False
    return all(_dot(P.facets[i].normal, k) <= 0 for i in P.tight_facets(tuple(b)))


def verify_bhs(
    f: LaurentPoly,
    g: LaurentPoly,
    b: Sequence[int],
    p: int,
    s_max: int,
    k_samples: Iterable[Sequence[int]],
    tamper_vector=None,
) -> Report:
    """a_{p^s k} == a_{p^(s-1) k} mod p^s for the expansion of g / f at b, when every
    lattice point of Delta is a vertex and every coefficient of f is a unit."""
    P = build_polytope(f.support())
    b = tuple(b)
    if f.ring.param:
        raise PreconditionFailed("this congruence is stated for constant coefficients with trivial Frobenius")
    extra = [x for x in P.lattice_points() if x not in P.vertices]
    if extra:
        raise PreconditionFailed("Delta has lattice points that are not vertices", points=[list(x) for x in extra])
    ring = BaseRing(p, s_max)
    fr = f.change_ring(ring)
    bad = [list(e) for e, c in fr.terms.items() if c % p == 0]
    if bad or len(fr) != len(f):
        raise PreconditionFailed("every coefficient of f must be a unit mod p", exponents=bad)
    gr = g.change_ring(ring)
    outside = [list(e) for e in gr.terms if not P.contains(e)]
    if outside:
        raise PreconditionFailed("g must be supported in Delta", exponents=outside)
    samples = [tuple(k) for k in k_samples]
    psi = vertex_grading(P, b)
    D = max(_dot(psi, _add(_sub(tuple(p**s_max * x for x in k), e), b)) for k in samples for e in gr.terms) if gr.terms else 0
    series = GeometricSeries(fr, P, b, max(D, 0))
    ex = expand_with(series, gr, 1)
    report = Report("bhs-congruence", p, list(range(1, s_max + 1)), None, "all-vertices")
    report.details.update(base_vertex=list(b), samples=[list(k) for k in samples])

    def coeff(k):
        v = ex.coefficient(k)
        if tamper_vector is not None:
            v = tamper_vector(k, v)
        return v

    for k in samples:
        for s in range(1, s_max + 1):
            hi = coeff(tuple(p**s * x for x in k))
            lo = coeff(tuple(p ** (s - 1) * x for x in k))
            report.checks += 1
            if (hi - lo) % p**s:
                report.fail(k=list(k), s=s, lhs=hi, rhs=lo, difference_valuation=p_valuation((hi - lo) % p**s_max, p, s_max))
    return report
