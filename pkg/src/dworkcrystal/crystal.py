"""Hasse-Witt matrices beta_m(mu), the Frobenius matrix Lambda and the connection
matrix N obtained as limits of their ratios, and the congruence verifiers.

For a region mu with lattice points mu_Z,

    beta_m[u, v] = coefficient of x^(m v - u) in f^(m-1),     beta_1 = identity,
    Lambda       = beta_{p^s} . sigma(beta_{p^(s-1)})^(-1)    mod p^s,
    N            = delta(beta_{p^s}) . beta_{p^s}^(-1)        mod p^s.

With a parameter t the entries are truncated Laurent series.  Inverting
matrices whose entries start with a power of t costs t-adic precision, so
every public entry point that promises a t-precision retries with a larger
working cap until the promise is met.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import ConfigurationError, NotInvertibleModP, PreconditionFailed, PrecisionShortfall
from .laurent import LaurentPoly, PowerCache, _dense_ok, logarithmic_derivative_numerators
from .polytope import NewtonPolytope, Region, build_polytope, full_region, interior_region, level_region
from .report import Report
from .ring import BaseRing, PAdicScalar, ParamSeries, RingMatrix, congruent, difference_valuation, matrix_invert

Tamper = Callable[[int, RingMatrix], RingMatrix]

DERIVATIONS = ("theta", "d/dt", "none")


# ---------------------------------------------------------------------------- value types


@dataclass
class BetaMatrix:
    m: int
    region: Region
    matrix: RingMatrix
    prime: int
    precision: int | None
    invertible: bool | None = None

    def to_dict(self) -> dict:
        return {"m": self.m, "region": self.region.name, "prime": self.prime, "precision": self.precision, "matrix": self.matrix, "invertible_mod_p": self.invertible}


@dataclass
class FrobeniusMatrix:
    matrix: RingMatrix
    precision: int
    region: Region
    t_precision: int | None = None

    def to_dict(self) -> dict:
        return {"region": self.region.name, "precision": self.precision, "t_precision": self.t_precision, "matrix": self.matrix}


@dataclass
class ConnectionMatrix:
    matrix: RingMatrix
    derivation: str
    precision: int
    region: Region
    t_precision: int | None = None

    def to_dict(self) -> dict:
        return {"region": self.region.name, "derivation": self.derivation, "precision": self.precision, "t_precision": self.t_precision, "matrix": self.matrix}


# ---------------------------------------------------------------------------- beta systems


class BetaSystem:
    """All beta_m(mu) of one polynomial at one working precision and t-cap.

    ``tamper`` (used by mutation tests) may replace any beta_m once, when it is
    first computed; the replacement is what every later query sees.
    """

    def __init__(
        self,
        f: LaurentPoly,
        region: Region,
        p: int,
        precision: int | None,
        series_cap: int | None = None,
        tamper: Tamper | None = None,
    ):
        param = f.ring.param
        if param and precision is not None and series_cap is None:
            raise ConfigurationError("a parameter family needs a series cap")
        self.ring = BaseRing(p, precision, param, series_cap if param else None)
        self.f = f.change_ring(self.ring)
        self.region = region
        self.points = list(region.lattice_points)
        self.p = p
        self.precision = precision
        self.series_cap = series_cap if param else None
        self.tamper = tamper
        self._beta: dict[int, RingMatrix] = {}
        self._powers = PowerCache(self.f) if _dense_ok(self.ring) and len(self.f) > 1 else None
        if not self.points:
            raise PreconditionFailed("region has no lattice points", region=region.name)

    @property
    def size(self) -> int:
        return len(self.points)

    def element(self, raw):
        return self.ring.to_element(raw)

    def _identity(self) -> RingMatrix:
        one, zero = self.element(self.ring.one), self.element(self.ring.zero)
        n = self.size
        return RingMatrix([[one if i == j else zero for j in range(n)] for i in range(n)], self.points)

    def beta(self, m: int) -> RingMatrix:
        if m < 1:
            raise ConfigurationError("m must be positive", m=m)
        if m in self._beta:
            return self._beta[m]
        if m == 1:
            mat = self._identity()
        else:
            targets = {(u, v): tuple(m * b - a for a, b in zip(u, v)) for u in self.points for v in self.points}
            if self._powers is not None:
                coeffs = self._powers.coefficients(m - 1, set(targets.values()))
                get = coeffs.__getitem__
            else:
                from .laurent import power

                poly = power(self.f, m - 1)
                get = poly.coefficient
            mat = RingMatrix([[self.element(get(targets[(u, v)])) for v in self.points] for u in self.points], self.points)
        if self.tamper is not None:
            mat = self.tamper(m, mat)
        self._beta[m] = mat
        return mat

    def sigma_beta(self, m: int) -> RingMatrix:
        return self.beta(m).frobenius()

    def reduced(self, mat: RingMatrix, s: int) -> RingMatrix:
        return mat if s == self.precision else mat.reduce(s)

    def frobenius_matrix(self, s: int) -> RingMatrix:
        """beta_{p^s} sigma(beta_{p^(s-1)})^(-1) mod p^s."""
        p = self.p
        top = self.reduced(self.beta(p**s), s)
        low = self.reduced(self.sigma_beta(p ** (s - 1)), s)
        return top @ matrix_invert(low)

    def connection_matrix(self, s: int, derivation: str) -> RingMatrix:
        """delta(beta_{p^s}) beta_{p^s}^(-1) mod p^s."""
        b = self.reduced(self.beta(self.p**s), s)
        return b.derivative(derivation) @ matrix_invert(b)

    def hasse_witt_invertible(self) -> bool:
        try:
            matrix_invert(self.reduced(self.beta(self.p), 1), check=False)
        except NotInvertibleModP:
            return False
        return True


def _source_ring(f: LaurentPoly) -> BaseRing:
    return f.ring


def t_degree(f: LaurentPoly) -> int:
    """Largest power of t among the coefficients of f (0 without a parameter)."""
    if not f.ring.param:
        return 0
    return max((len(c) - 1 for c in f.terms.values()), default=0)


def hasse_witt_invertible(f: LaurentPoly, region: Region, p: int) -> bool:
    """Exact test: beta_p entries are polynomials in t of degree <= (p-1) deg_t f,
    so a cap beyond that degree makes the reduction mod p exact."""
    cap = (p - 1) * t_degree(f) + 2 if f.ring.param else None
    return BetaSystem(f, region, p, 1, cap).hasse_witt_invertible()


def _adaptive(f: LaurentPoly, region: Region, p: int, precision: int, target: int | None, run, tamper: Tamper | None = None, attempts: int = 10):
    """Call ``run(system)`` -> (result, t_precision) until t_precision >= target.

    A singular pivot with a parameter can be an artifact of truncation (the
    unit coefficient lies beyond the cap); once the Hasse-Witt matrix is known
    to be invertible the cap is doubled instead of giving up.
    """
    if not f.ring.param:
        result, _ = run(BetaSystem(f, region, p, precision, None, tamper))
        return result
    cap = target
    achieved = None
    checked = False
    for _ in range(attempts):
        system = BetaSystem(f, region, p, precision, cap, tamper)
        try:
            result, achieved = run(system)
        except NotInvertibleModP:
            if not checked:
                if not hasse_witt_invertible(f, region, p):
                    raise
                checked = True
            cap *= 2
            continue
        if achieved is None or achieved >= target:
            return result
        cap += (target - achieved) + 2
    raise PrecisionShortfall(
        "could not reach the requested t-precision",
        target=target,
        achieved=achieved,
        working_cap=cap,
    )


def _matrix_cap(*mats: RingMatrix) -> int | None:
    caps = [m.min_cap() for m in mats]
    caps = [c for c in caps if c is not None]
    return min(caps) if caps else None


def default_series_cap(f: LaurentPoly, series_cap: int | None) -> int | None:
    if not f.ring.param:
        return None
    return 32 if series_cap is None else series_cap


# ---------------------------------------------------------------------------- public computations


def beta(f: LaurentPoly, m: int, region: Region, p: int, s: int, series_cap: int | None = None) -> BetaMatrix:
    """beta_m(mu) mod p^s (and mod t^series_cap for parameter families)."""
    system = BetaSystem(f, region, p, s, default_series_cap(f, series_cap))
    return BetaMatrix(m, region, system.beta(m), p, s)


def hasse_witt(f: LaurentPoly, region: Region, p: int, s: int, series_cap: int | None = None) -> BetaMatrix:
    """beta_p(mu) together with its invertibility modulo p."""
    system = BetaSystem(f, region, p, s, default_series_cap(f, series_cap))
    return BetaMatrix(p, region, system.beta(p), p, s, system.hasse_witt_invertible())


def lambda_sigma(f: LaurentPoly, region: Region, p: int, s: int, series_cap: int | None = None) -> FrobeniusMatrix:
    cap = default_series_cap(f, series_cap)

    def run(system):
        lam = system.frobenius_matrix(s)
        return lam, lam.min_cap()

    lam = _adaptive(f, region, p, s, cap, run)
    if cap is not None:
        lam = lam.truncate(cap)
    return FrobeniusMatrix(lam, s, region, lam.min_cap())


def n_delta(f: LaurentPoly, region: Region, p: int, s: int, derivation: str = "theta", series_cap: int | None = None) -> ConnectionMatrix:
    cap = default_series_cap(f, series_cap)
    target = None if cap is None else (cap - 1 if derivation == "d/dt" else cap)

    def run(system):
        nd = system.connection_matrix(s, derivation)
        return nd, nd.min_cap()

    nd = _adaptive(f, region, p, s, target, run)
    if target is not None:
        nd = nd.truncate(target)
    return ConnectionMatrix(nd, derivation, s, region, nd.min_cap())


# ---------------------------------------------------------------------------- comparisons


def compare_matrices(lhs: RingMatrix, rhs: RingMatrix, precision: int, labels: Sequence, **context) -> list[dict]:
    """Witnesses (u, v, valuation of the difference) where lhs != rhs mod p^precision."""
    out = []
    for i, u in enumerate(labels):
        for j, v in enumerate(labels):
            a, b = lhs[i, j], rhs[i, j]
            if not congruent(a, b, precision):
                out.append({**context, "u": list(u), "v": list(v), "difference_valuation": difference_valuation(a, b, precision), "lhs": a, "rhs": b})
    return out


def _t_precision(*mats: RingMatrix) -> int | None:
    return _matrix_cap(*mats)


def verify_beta_congruence(
    f: LaurentPoly,
    region: Region,
    p: int,
    s_max: int,
    m_list: Iterable[int] = (1, 2, 3),
    series_cap: int | None = None,
    tamper: Tamper | None = None,
    include_stability: bool = True,
) -> Report:
    """beta_{m p^s} == Lambda sigma(beta_{m p^(s-1)}) mod p^s for s <= s_max, m in m_list.

    Lambda is computed once at precision s_max and reduced.  With
    ``include_stability`` the ratios at consecutive precisions are also
    compared (the limit is well defined).
    """
    m_list = list(m_list)
    cap = default_series_cap(f, series_cap)

    def run(system: BetaSystem):
        report = Report("beta-congruence", p, list(range(1, s_max + 1)), m_list, region.name)
        lam_top = system.frobenius_matrix(s_max)
        tprec = [lam_top.min_cap()]
        for s in range(1, s_max + 1):
            lam = system.reduced(lam_top, s)
            for m in m_list:
                lhs = system.reduced(system.beta(m * p**s), s)
                rhs = lam @ system.reduced(system.sigma_beta(m * p ** (s - 1)), s)
                tprec.append(_t_precision(lhs, rhs))
                report.checks += 1
                for w in compare_matrices(lhs, rhs, s, system.points, form="main", m=m, s=s):
                    report.fail(**w)
        if include_stability:
            for s in range(1, s_max):
                upper = system.reduced(system.frobenius_matrix(s + 1), s)
                lower = system.frobenius_matrix(s)
                tprec.append(_t_precision(upper, lower))
                report.checks += 1
                for w in compare_matrices(upper, lower, s, system.points, form="stability", s=s):
                    report.fail(**w)
        achieved = min((c for c in tprec if c is not None), default=None)
        report.details["t_precision"] = achieved
        return report, achieved

    return _adaptive(f, region, p, s_max, cap, run, tamper)


def verify_intro_stability(f: LaurentPoly, region: Region, p: int, s_max: int, series_cap: int | None = None, tamper: Tamper | None = None) -> Report:
    """Consecutive ratios beta_{p^(s+1)} sigma(beta_{p^s})^(-1) agree mod p^s, for s < s_max."""
    cap = default_series_cap(f, series_cap)

    def run(system: BetaSystem):
        report = Report("ratio-stability", p, list(range(1, s_max)), None, region.name)
        tprec = []
        for s in range(1, s_max):
            upper = system.reduced(system.frobenius_matrix(s + 1), s)
            lower = system.frobenius_matrix(s)
            tprec.append(_t_precision(upper, lower))
            report.checks += 1
            for w in compare_matrices(upper, lower, s, system.points, s=s):
                report.fail(**w)
        achieved = min((c for c in tprec if c is not None), default=None)
        report.details["t_precision"] = achieved
        return report, achieved

    return _adaptive(f, region, p, s_max, cap, run, tamper)


def verify_delta_congruence(
    f: LaurentPoly,
    region: Region,
    p: int,
    s_max: int,
    derivation: str = "theta",
    m_list: Iterable[int] = (1, 2, 3),
    series_cap: int | None = None,
    tamper: Tamper | None = None,
) -> Report:
    """delta(beta_{m p^s}) == N beta_{m p^s} mod p^s, plus stability of the ratios."""
    if derivation not in DERIVATIONS:
        raise ConfigurationError(f"unknown derivation {derivation!r}")
    m_list = list(m_list)
    cap = default_series_cap(f, series_cap)
    target = None if cap is None else cap - 1

    def run(system: BetaSystem):
        report = Report("delta-congruence", p, list(range(1, s_max + 1)), m_list, region.name)
        report.details["derivation"] = derivation
        n_top = system.connection_matrix(s_max, derivation)
        tprec = [n_top.min_cap()]
        for s in range(1, s_max + 1):
            nd = system.reduced(n_top, s)
            for m in m_list:
                b = system.reduced(system.beta(m * p**s), s)
                lhs = b.derivative(derivation)
                rhs = nd @ b
                tprec.append(_t_precision(lhs, rhs))
                report.checks += 1
                for w in compare_matrices(lhs, rhs, s, system.points, form="main", m=m, s=s):
                    report.fail(**w)
        for s in range(1, s_max):
            upper = system.reduced(system.connection_matrix(s + 1, derivation), s)
            lower = system.connection_matrix(s, derivation)
            tprec.append(_t_precision(upper, lower))
            report.checks += 1
            for w in compare_matrices(upper, lower, s, system.points, form="stability", s=s):
                report.fail(**w)
        achieved = min((c for c in tprec if c is not None), default=None)
        report.details["t_precision"] = achieved
        return report, achieved

    return _adaptive(f, region, p, s_max, target, run, tamper)


# ---------------------------------------------------------------------------- rows f_i / f


def coefficient_rows(f: LaurentPoly, points: Sequence) -> list[list]:
    """Row vectors of the coefficients of f, x_1 df/dx_1, ..., x_n df/dx_n on the given points."""
    return [[g.coefficient(u) for u in points] for g in logarithmic_derivative_numerators(f)]


def verify_rows(
    rows: Sequence[Sequence],
    f: LaurentPoly,
    region: Region,
    p: int,
    s: int,
    derivation: str = "theta",
    series_cap: int | None = None,
    tamper: Tamper | None = None,
) -> Report:
    """c Lambda == sigma(c) and c N == -delta(c) mod p^s for each row vector c (raw or element entries)."""
    cap = default_series_cap(f, series_cap)
    target = None if cap is None else cap - 1

    def run(system: BetaSystem):
        report = Report("fixed-rows", p, s, None, region.name)
        lam = system.frobenius_matrix(s)
        nd = system.connection_matrix(s, derivation)
        tprec = [lam.min_cap(), nd.min_cap()]
        n = system.size
        for idx, row in enumerate(rows):
            c = [x if isinstance(x, (PAdicScalar, ParamSeries)) else system.element(system.ring.convert(x)) for x in row]
            if system.precision != s:
                c = [x.reduce(s) for x in c]
            for j in range(n):
                acc_l = c[0] * lam[0, j]
                acc_n = c[0] * nd[0, j]
                for i in range(1, n):
                    acc_l = acc_l + c[i] * lam[i, j]
                    acc_n = acc_n + c[i] * nd[i, j]
                want_l = c[j].frobenius()
                want_n = -c[j].derivative(derivation)
                for got, want, kind in ((acc_l, want_l, "frobenius"), (acc_n, want_n, "connection")):
                    report.checks += 1
                    if isinstance(got, ParamSeries):
                        tprec.append(min(x for x in (got.cap, getattr(want, "cap", None)) if x is not None) if (got.cap is not None) else None)
                    if not congruent(got, want, s):
                        report.fail(row=idx, column=list(system.points[j]), kind=kind, lhs=got, rhs=want, difference_valuation=difference_valuation(got, want, s))
        achieved = min((c for c in tprec if c is not None), default=None)
        report.details["t_precision"] = achieved
        return report, achieved

    return _adaptive(f, region, p, s, target, run, tamper)


def verify_fixed_rows(
    f: LaurentPoly,
    p: int,
    s: int,
    derivation: str = "theta",
    series_cap: int | None = None,
    extra_rows: Sequence[Sequence] = (),
    tamper: Tamper | None = None,
) -> Report:
    """The coefficient rows of f_i = x_i df/dx_i (i = 0..n, f_0 = f) on all of Delta are
    fixed by Frobenius and flat for the connection."""
    P = build_polytope(f.support())
    region = full_region(P)
    rows = coefficient_rows(f, region.lattice_points) + [list(r) for r in extra_rows]
    report = verify_rows(rows, f, region, p, s, derivation, series_cap, tamper)
    report.details["rows"] = len(rows)
    return report


# ---------------------------------------------------------------------------- block structure


def face_restriction(f: LaurentPoly, polytope: NewtonPolytope, face) -> LaurentPoly:
    return f.restrict(lambda e: polytope.contains(e) and frozenset(polytope.tight_facets(e)) >= face.facets)


def block_decomposition(
    f: LaurentPoly,
    p: int,
    s: int = 1,
    m_list: Iterable[int] = (3, 5),
    series_cap: int | None = None,
    tamper: Tamper | None = None,
) -> Report:
    """Check the block-triangular shape of beta_m(Delta) along the face filtration.

    * entries beta_m[u, v] with v on a proper face that does not contain u vanish exactly;
    * the diagonal block on the interior points of each face equals beta_m of the
      restriction of f to that face;
    * beta_p(mu^(l)) is invertible mod p exactly when all its diagonal blocks are.

    Exactness is checked over the integers (no reduction); invertibility mod p.
    """
    P = build_polytope(f.support())
    region = full_region(P)
    points = region.lattice_points
    report = Report("block-structure", p, s, list(m_list), region.name)
    R = f.ring
    vertex_units = {}
    for v in P.vertices:
        unit = _is_unit_raw(f.coefficient(v), R, p)
        vertex_units[v] = unit
    if not all(vertex_units.values()):
        raise PreconditionFailed("vertex coefficients must be units", vertices=[list(v) for v, ok in vertex_units.items() if not ok])

    exact = BaseRing(p, None, R.param, None)
    f_exact = f.change_ring(exact)
    exact_system = BetaSystem(f_exact, region, p, None, None, tamper)
    faces = [F for F in P.faces]
    index = {u: i for i, u in enumerate(points)}
    blocks = []
    for F in faces:
        pts = [u for u in points if P.minimal_face(u) == F]
        if pts:
            blocks.append((F, pts))
    report.details["blocks"] = [{"face": [list(v) for v in F.vertices], "codimension": F.codimension, "points": [list(u) for u in pts]} for F, pts in blocks]

    for m in m_list:
        B = exact_system.beta(m)
        for u in points:
            for v in points:
                Fv = P.minimal_face(v)
                if Fv.codimension == 0:
                    continue
                u_in = frozenset(P.tight_facets(u)) >= Fv.facets
                if not u_in:
                    report.checks += 1
                    x = B[index[u], index[v]]
                    if not _is_zero(x):
                        report.fail(kind="zero-block", m=m, u=list(u), v=list(v), value=x)
        for F, pts in blocks:
            restricted = face_restriction(f_exact, P, F)
            sub = build_polytope(restricted.support())
            sub_region = interior_region(sub) if sub.dimension > 0 else full_region(sub)
            if sorted(sub_region.lattice_points) != sorted(pts):
                report.fail(kind="face-interior", face=[list(v) for v in F.vertices])
                continue
            sub_beta = BetaSystem(restricted, sub_region, p, None).beta(m)
            for i, u in enumerate(sub_region.lattice_points):
                for j, v in enumerate(sub_region.lattice_points):
                    report.checks += 1
                    if sub_beta[i, j] != B[index[u], index[v]]:
                        report.fail(kind="diagonal-block", m=m, face=[list(w) for w in F.vertices], u=list(u), v=list(v))

    # invertibility along the filtration
    cap = default_series_cap(f, series_cap)
    inv_details = []
    for level in range(P.dimension + 1):
        mu = level_region(P, level)
        if not mu.lattice_points:
            continue
        full_ok = BetaSystem(f, mu, p, 1, cap).hasse_witt_invertible()
        parts_ok = []
        prev = level_region(P, level - 1) if level > 0 else None
        for F, pts in blocks:
            if F.codimension == level:
                restricted = face_restriction(f, P, F)
                sub = build_polytope(restricted.support())
                sub_region = interior_region(sub) if sub.dimension > 0 else full_region(sub)
                parts_ok.append(BetaSystem(restricted, sub_region, p, 1, cap).hasse_witt_invertible())
        if prev is not None and prev.lattice_points:
            parts_ok.append(BetaSystem(f, prev, p, 1, cap).hasse_witt_invertible())
        report.checks += 1
        inv_details.append({"level": level, "invertible": full_ok, "blocks_invertible": parts_ok})
        if full_ok != all(parts_ok):
            report.fail(kind="invertibility", level=level, invertible=full_ok, blocks=parts_ok)
    report.details["invertibility"] = inv_details
    return report


def _is_zero(x) -> bool:
    if isinstance(x, (PAdicScalar, ParamSeries)):
        return x.is_zero()
    return x == 0


def _is_unit_raw(c, ring: BaseRing, p: int) -> bool:
    """Unit in Z_p, or in the t-adically completed Laurent ring for parameter coefficients."""
    if ring.param:
        return any(x % p for x in c)
    return c % p != 0
