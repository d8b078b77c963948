"""The formal group law attached to an open region.

The logarithm is the h-tuple

    l_u(z) = sum_{m >= 1} (1/m) sum_w beta_m[u, w] z_w^m,

and the group law is G(z, z') = l^{-1}(l(z) + l(z')).  Everything here is
exact: coefficients are polynomials in t with rational coefficients, and
the beta matrices are computed over the integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .crystal import BetaSystem, Tamper, _adaptive, default_series_cap
from .errors import ConfigurationError
from .laurent import LaurentPoly
from .polytope import Region
from .report import Report
from .ring import ParamSeries, congruent, p_valuation

# A coefficient is a polynomial in t: tuple of Fractions, constant term first.
Coeff = tuple
Monomial = tuple[int, ...]


def _trim(c: list) -> Coeff:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def cadd(a: Coeff, b: Coeff) -> Coeff:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def cmul(a: Coeff, b: Coeff) -> Coeff:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def cscale(a: Coeff, k) -> Coeff:
    return _trim([x * k for x in a])


def csigma(a: Coeff, p: int) -> Coeff:
    """t -> t^p."""
    if not a:
        return a
    out = [Fraction(0)] * ((len(a) - 1) * p + 1)
    out[::p] = a
    return tuple(out)


def as_coeff(raw) -> Coeff:
    """Exact ring element (int, tuple of ints or exact series) to a coefficient."""
    if isinstance(raw, ParamSeries):
        terms = raw.terms()
        if any(k < 0 for k in terms):
            raise ConfigurationError("coefficient has a pole in t")
        return _trim([Fraction(terms.get(k, 0)) for k in range(max(terms, default=-1) + 1)])
    if isinstance(raw, tuple):
        return _trim([Fraction(x) for x in raw])
    return _trim([Fraction(raw)])


class MultiSeries:
    """A power series in ``nvars`` variables truncated at total degree ``degree``."""

    __slots__ = ("terms", "nvars", "degree")

    def __init__(self, terms: dict[Monomial, Coeff], nvars: int, degree: int):
        self.terms = {e: c for e, c in terms.items() if c and sum(e) <= degree}
        self.nvars = nvars
        self.degree = degree

    @classmethod
    def variable(cls, i: int, nvars: int, degree: int) -> "MultiSeries":
        e = tuple(1 if j == i else 0 for j in range(nvars))
        return cls({e: (Fraction(1),)}, nvars, degree)

    @classmethod
    def zero(cls, nvars: int, degree: int) -> "MultiSeries":
        return cls({}, nvars, degree)

    @classmethod
    def constant(cls, c: Coeff, nvars: int, degree: int) -> "MultiSeries":
        return cls({(0,) * nvars: c}, nvars, degree)

    def coefficient(self, e: Sequence[int]) -> Coeff:
        return self.terms.get(tuple(e), ())

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = cadd(out.get(e, ()), c)
        return MultiSeries(out, self.nvars, min(self.degree, other.degree))

    def __neg__(self) -> "MultiSeries":
        return MultiSeries({e: cscale(c, -1) for e, c in self.terms.items()}, self.nvars, self.degree)

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return self + (-other)

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        D = min(self.degree, other.degree)
        out: dict[Monomial, Coeff] = {}
        for ea, ca in self.terms.items():
            da = sum(ea)
            for eb, cb in other.terms.items():
                if da + sum(eb) > D:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = cadd(out.get(e, ()), cmul(ca, cb))
        return MultiSeries(out, self.nvars, D)

    def scale(self, c: Coeff) -> "MultiSeries":
        return MultiSeries({e: cmul(x, c) for e, x in self.terms.items()}, self.nvars, self.degree)

    def __pow__(self, k: int) -> "MultiSeries":
        result = MultiSeries.constant((Fraction(1),), self.nvars, self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def homogeneous(self, d: int) -> dict[Monomial, Coeff]:
        return {e: c for e, c in self.terms.items() if sum(e) == d}

    def low_degree(self) -> int | None:
        return min((sum(e) for e in self.terms), default=None)

    def compose(self, subs: Sequence["MultiSeries"]) -> "MultiSeries":
        """Substitute series without constant term for the variables."""
        if len(subs) != self.nvars:
            raise ConfigurationError("wrong number of substitutions")
        if not subs:
            return self
        target_vars, D = subs[0].nvars, min(min(s.degree for s in subs), self.degree)
        for s in subs:
            if any(sum(e) == 0 for e in s.terms):
                raise ConfigurationError("substituted series must have no constant term")
        powers: list[list[MultiSeries]] = []
        for s in subs:
            row = [MultiSeries.constant((Fraction(1),), target_vars, D)]
            maxdeg = max((e[len(powers)] for e in self.terms), default=0)
            for _ in range(maxdeg):
                row.append(row[-1] * s)
            powers.append(row)
        out = MultiSeries.zero(target_vars, D)
        for e, c in self.terms.items():
            term = MultiSeries.constant(c, target_vars, D)
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            out = out + term
        return out

    def sigma(self, p: int) -> "MultiSeries":
        return MultiSeries({e: csigma(c, p) for e, c in self.terms.items()}, self.nvars, self.degree)

    def __eq__(self, other):
        return isinstance(other, MultiSeries) and self.terms == other.terms and self.nvars == other.nvars

    def to_dict(self) -> dict:
        return {
            "variables": self.nvars,
            "degree": self.degree,
            "terms": [{"monomial": list(e), "coefficient": [str(x) for x in c]} for e, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))],
        }

    def __repr__(self):
        return f"MultiSeries({len(self.terms)} terms, nvars={self.nvars}, degree<={self.degree})"


@dataclass
class FormalLogarithm:
    """The h-tuple l(z) together with the beta data it was built from."""

    components: list[MultiSeries]
    points: list
    degree: int
    prime: int

    def __call__(self, subs: Sequence[MultiSeries]) -> list[MultiSeries]:
        return [c.compose(subs) for c in self.components]

    def nonlinear(self) -> list[MultiSeries]:
        """l(z) - z."""
        h = len(self.points)
        return [c - MultiSeries.variable(i, h, self.degree) for i, c in enumerate(self.components)]


def exact_betas(f: LaurentPoly, region: Region, p: int, degree: int, tamper: Tamper | None = None) -> dict:
    system = BetaSystem(f, region, p, None, None, tamper)
    return {m: system.beta(m) for m in range(1, degree + 1)}


def fgl_logarithm(f: LaurentPoly, region: Region, p: int, degree: int, tamper: Tamper | None = None) -> FormalLogarithm:
    """l_u(z) = sum_{m <= degree} (1/m) sum_w beta_m[u, w] z_w^m with exact coefficients."""
    if degree < 1:
        raise ConfigurationError("degree must be positive", degree=degree)
    betas = exact_betas(f, region, p, degree, tamper)
    points = list(region.lattice_points)
    h = len(points)
    comps = []
    for i in range(h):
        terms: dict[Monomial, Coeff] = {}
        for m, B in betas.items():
            for j in range(h):
                c = cscale(as_coeff(B[i, j]), Fraction(1, m))
                if c:
                    e = tuple(m if k == j else 0 for k in range(h))
                    terms[e] = cadd(terms.get(e, ()), c)
        comps.append(MultiSeries(terms, h, degree))
    return FormalLogarithm(comps, points, degree, p)


def _solve(log: FormalLogarithm, rhs: list[MultiSeries]) -> list[MultiSeries]:
    """The tuple g with l(g) = rhs, by the fixed-point iteration g = rhs - (l(g) - g)."""
    nl = log.nonlinear()
    g = list(rhs)
    for _ in range(log.degree):
        corr = [c.compose(g) for c in nl]
        g = [r - c for r, c in zip(rhs, corr)]
    return g


def fgl_inverse(log: FormalLogarithm) -> list[MultiSeries]:
    """l^{-1} as an h-tuple of series in h variables."""
    h = len(log.points)
    return _solve(log, [MultiSeries.variable(i, h, log.degree) for i in range(h)])


def fgl_group_law(log: FormalLogarithm) -> list[MultiSeries]:
    """G(z, z') = l^{-1}(l(z) + l(z')) in 2h variables (z first, then z')."""
    h = len(log.points)
    D = log.degree
    z = [MultiSeries.variable(i, 2 * h, D) for i in range(h)]
    zp = [MultiSeries.variable(h + i, 2 * h, D) for i in range(h)]
    total = [a + b for a, b in zip(log(z), log(zp))]
    return _solve(log, total)


def coefficient_valuation(c: Coeff, p: int) -> int | None:
    """Minimum p-adic valuation over the t-coefficients (None for zero)."""
    vals = [p_valuation(x.numerator, p) - p_valuation(x.denominator, p) for x in c if x]
    return min(vals) if vals else None


def verify_fgl_integrality(G: Sequence[MultiSeries], p: int, s: int | None = None) -> Report:
    """Every coefficient of G has nonnegative p-adic valuation."""
    report = Report("fgl-integrality", p, s, None, None)
    worst = None
    for i, comp in enumerate(G):
        for e, c in sorted(comp.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            v = coefficient_valuation(c, p)
            report.checks += 1
            if v is None:
                continue
            worst = v if worst is None else min(worst, v)
            if v < 0:
                report.fail(component=i, monomial=list(e), degree=sum(e), coefficient=[str(x) for x in c], valuation=v)
    report.details["minimal_valuation"] = worst
    if G:
        report.details["degree"] = G[0].degree
    return report


def verify_fgl_axioms(log: FormalLogarithm, G: Sequence[MultiSeries] | None = None) -> Report:
    """G(z, 0) = z, G(0, z') = z', commutativity and associativity through the truncation degree."""
    G = list(G) if G is not None else fgl_group_law(log)
    h = len(log.points)
    D = log.degree
    report = Report("fgl-axioms", log.prime, None, None, None)

    def var(i, n):
        return MultiSeries.variable(i, n, D)

    zero = MultiSeries.zero(h, D)
    z = [var(i, h) for i in range(h)]
    checks = {
        "left-unit": ([g.compose(z + [zero] * h) for g in G], z),
        "right-unit": ([g.compose([zero] * h + z) for g in G], z),
    }
    a = [var(i, 2 * h) for i in range(h)]
    b = [var(h + i, 2 * h) for i in range(h)]
    checks["commutativity"] = ([g.compose(b + a) for g in G], list(G))
    x = [var(i, 3 * h) for i in range(h)]
    y = [var(h + i, 3 * h) for i in range(h)]
    w = [var(2 * h + i, 3 * h) for i in range(h)]
    xy = [g.compose(x + y) for g in G]
    yw = [g.compose(y + w) for g in G]
    checks["associativity"] = ([g.compose(xy + w) for g in G], [g.compose(x + yw) for g in G])
    for name, (lhs, rhs) in checks.items():
        for i, (l, r) in enumerate(zip(lhs, rhs)):
            report.checks += 1
            if l != r:
                diff = l - r
                first = min(diff.terms, key=lambda e: (sum(e), e))
                report.fail(axiom=name, component=i, monomial=list(first), difference=[str(c) for c in diff.terms[first]])
    return report


def verify_functional_equation(
    f: LaurentPoly,
    region: Region,
    p: int,
    degree: int,
    series_cap: int | None = None,
    tamper: Tamper | None = None,
) -> Report:
    """l(z) - p^{-1} Lambda l^sigma(z^p) has p-integral coefficients through ``degree``.

    Only the degrees m = pk can have a denominator; there the condition is
    beta_{pk} == Lambda sigma(beta_k) mod p^{1 + ord_p(k)}.  Lambda is taken
    at a precision s with p^(s-1) > degree, so the two betas defining it are
    never among the matrices being compared; a corrupted beta_{pk} cannot
    cancel against a Lambda built from itself.
    """
    ks = [k for k in range(1, degree // p + 1)]
    report = Report("fgl-functional-equation", p, None, None, region.name)
    if not ks:
        report.details["note"] = "no degree divisible by p within the bound"
        return report
    s = max(2 + max(p_valuation(k, p) for k in ks), 2)
    while p ** (s - 1) <= degree:
        s += 1
    cap = default_series_cap(f, series_cap)
    target = None if cap is None else cap - 1
    report.s = s

    def run(system: BetaSystem):
        rep = Report("fgl-functional-equation", p, s, None, region.name)
        lam = system.frobenius_matrix(s)
        tprec = [lam.min_cap()]
        n = system.size
        for k in ks:
            need = 1 + p_valuation(k, p)
            lhs = system.reduced(system.beta(p * k), s)
            rhs = lam @ system.reduced(system.sigma_beta(k), s)
            for i in range(n):
                for j in range(n):
                    rep.checks += 1
                    a, b = lhs[i, j], rhs[i, j]
                    if hasattr(b, "cap") and b.cap is not None:
                        tprec.append(b.cap)
                    if not congruent(a, b, need):
                        rep.fail(degree=p * k, u=list(system.points[i]), w=list(system.points[j]), needed_valuation=need, lhs=a, rhs=b)
        achieved = min((c for c in tprec if c is not None), default=None)
        rep.details["t_precision"] = achieved
        rep.details["degree"] = degree
        return rep, achieved

    return _adaptive(f, region, p, s, target, run, tamper)


def multiplicative_law(degree: int) -> MultiSeries:
    """z + z' - z z'."""
    z, zp = MultiSeries.variable(0, 2, degree), MultiSeries.variable(1, 2, degree)
    return z + zp - z * zp
