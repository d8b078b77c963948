"""Command line interface: ``dworkcrystal <command> SPEC [options]``.

Exit status is 0 when everything computed passes (or is skipped with a
reason), 1 when a congruence fails, and 2 for bad input or unmet
preconditions.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import Callable

from . import cartier, crystal, expansion, fgl, zeta
from .errors import CrystalError
from .laurent import LaurentPoly
from .polytope import all_open_regions
from .problem import ProblemSpec, bundled_fixtures, dumps_toml, load
from .report import FAIL, Report, dumps, skipped, to_jsonable
from .ring import BaseRing, RingMatrix

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


# ---------------------------------------------------------------------------- output helpers


def format_matrix(M: RingMatrix, ring: BaseRing, annotate=None) -> str:
    cells = [[_fmt(x) for x in row] for row in M.rows]
    width = max((len(c) for row in cells for c in row), default=1)
    labels = [str(tuple(u)) for u in (M.labels or range(M.nrows))]
    lw = max(len(x) for x in labels)
    lines = []
    for lab, row, i in zip(labels, cells, range(M.nrows)):
        note = f"  {annotate(i)}" if annotate else ""
        lines.append(f"{lab:>{lw}} | " + "  ".join(c.rjust(width) for c in row) + note)
    return "\n".join(lines)


def _fmt(x) -> str:
    if hasattr(x, "signed_terms"):
        terms = x.signed_terms()
        if not terms:
            return "0"
        parts = []
        for k, c in sorted(terms.items()):
            mono = "t" if k == 1 else f"t^{k}"
            parts.append(str(c) if k == 0 else (mono if c == 1 else "-" + mono if c == -1 else f"{c}*{mono}"))
        return " + ".join(parts).replace("+ -", "- ")
    if hasattr(x, "signed"):
        return str(x.signed())
    return str(x)


class Output:
    def __init__(self, json_path: str | None):
        self.json_path = json_path
        self.payload: dict = {}
        self.reports: list[Report] = []

    @property
    def _stream(self):
        # keep stdout parseable when the JSON document is written there
        return sys.stderr if self.json_path == "-" else sys.stdout

    def text(self, s: str = "") -> None:
        print(s, file=self._stream)

    def report(self, r: Report) -> None:
        self.reports.append(r)
        print(r.summary(), file=self._stream)

    def finish(self, command: str, spec: ProblemSpec | None) -> int:
        status = EXIT_FAIL if any(r.status == FAIL for r in self.reports) else EXIT_OK
        doc = {"command": command, "outcome": "violation" if status == EXIT_FAIL else "ok"}
        doc.update(self.payload)
        if spec is not None:
            doc["problem"] = spec.to_dict()
        if self.reports:
            doc["reports"] = [r.to_dict() for r in self.reports]
        if self.json_path:
            text = dumps(doc) + "\n"
            if self.json_path == "-":
                sys.stdout.write(text)
            else:
                Path(self.json_path).write_text(text)
        return status


# ---------------------------------------------------------------------------- spec handling


def apply_overrides(spec: ProblemSpec, args) -> ProblemSpec:
    if getattr(args, "precision", None) is not None:
        spec.precision = args.precision
        spec.verify["s_max"] = args.precision
    if getattr(args, "series_cap", None) is not None:
        spec.series_cap = args.series_cap
    if getattr(args, "prime", None) is not None:
        spec.prime = args.prime
    return spec


def _context(spec: ProblemSpec):
    f = spec.polynomial()
    region = spec.build_region()
    return f, region, spec.prime, spec.precision, spec.series_cap_value


# ---------------------------------------------------------------------------- commands


def cmd_beta(spec: ProblemSpec, args, out: Output) -> None:
    f, region, p, s, cap = _context(spec)
    B = crystal.beta(f, args.m, region, p, s, cap)
    out.text(f"beta_{args.m} on {region.name} mod {p}^{s}" + (f", t^{cap}" if cap else ""))
    out.text(format_matrix(B.matrix, None))
    out.payload["beta"] = B.to_dict()


def _face_note(P, points):
    def note(i):
        F = P.minimal_face(points[i])
        return f"face {F.label()} codim {F.codimension}"

    return note


def cmd_hasse_witt(spec: ProblemSpec, args, out: Output) -> None:
    f, region, p, s, cap = _context(spec)
    B = crystal.hasse_witt(f, region, p, 1, cap)
    P = region.parent
    out.text(f"Hasse-Witt matrix beta_{p} on {region.name} mod {p}" + (f", t^{cap}" if cap else ""))
    out.text(format_matrix(B.matrix, None, _face_note(P, region.lattice_points)))
    inv = crystal.hasse_witt_invertible(f, region, p)
    out.text(f"invertible mod {p}: {inv}")
    out.payload["hasse_witt"] = B.to_dict()
    out.payload["invertible"] = inv


def cmd_lambda(spec: ProblemSpec, args, out: Output) -> None:
    f, region, p, s, cap = _context(spec)
    L = crystal.lambda_sigma(f, region, p, s, cap)
    out.text(f"Frobenius matrix on {region.name} mod {p}^{s}")
    out.text(format_matrix(L.matrix, None))
    out.payload["frobenius"] = L.to_dict()


def cmd_connection(spec: ProblemSpec, args, out: Output) -> None:
    f, region, p, s, cap = _context(spec)
    if spec.derivation == "none":
        raise CrystalError("the problem declares no derivation")
    N = crystal.n_delta(f, region, p, s, spec.derivation, cap)
    out.text(f"connection matrix ({spec.derivation}) on {region.name} mod {p}^{s}")
    out.text(format_matrix(N.matrix, None))
    out.payload["connection"] = N.to_dict()


def _samples(spec: ProblemSpec, seed: int | None):
    P = spec.polytope()
    b = tuple(spec.expansion["vertex"])
    samples = [tuple(k) for k in spec.expansion.get("samples", [])]
    if not samples:
        samples = expansion.cone_samples(P, b, 5)
    if seed is not None:
        rng = random.Random(seed)
        pool = expansion.cone_samples(P, b, 30)
        samples = sorted(set(samples) | set(rng.sample(pool, min(3, len(pool)))))
    return b, samples


def verifier_table(spec: ProblemSpec, seed: int | None) -> dict[str, Callable[[], Report]]:
    """Named verifiers applicable to this problem."""
    f, region, p, s, cap = _context(spec)
    s_max, m_list = spec.s_max, spec.m_list
    param = spec.has_parameter
    table: dict[str, Callable[[], Report]] = {
        "beta": lambda: crystal.verify_beta_congruence(f, region, p, s_max, m_list, cap),
        "stability": lambda: crystal.verify_intro_stability(f, region, p, s_max + 1, cap),
    }
    if param and spec.derivation != "none":
        table["delta"] = lambda: crystal.verify_delta_congruence(f, region, p, s_max, spec.derivation, m_list, cap)
    table["rows"] = lambda: crystal.verify_fixed_rows(f, p, s_max, spec.derivation if param else "none", cap)
    table["blocks"] = lambda: crystal.block_decomposition(f, p, 1, (3, 5, p), cap)
    if p > 2:

        def cartier_all() -> Report:
            merged = Report("cartier-mod-p", p, 1, p, "all open regions")
            for mu in all_open_regions(region.parent):
                r = cartier.verify_cartier_mod_p(f, mu, p, series_cap=cap)
                merged.checks += r.checks
                for w in r.witnesses:
                    merged.fail(region=mu.name, **w)
            return merged

        table["cartier"] = cartier_all
        table["cartier-valuation"] = lambda: cartier.verify_cartier_valuations(f, p, s_max, series_cap=cap)
        table["cartier-periods"] = lambda: cartier.verify_cartier_period_compat(f, p, s_max, series_cap=cap)
    if spec.expansion is not None:
        b, samples = _samples(spec, seed)
        table["katz"] = lambda: expansion.verify_katz_congruences(
            f, region, b, p, s_max, samples, spec.derivation if param else "none", cap, spec.expansion.get("degree_bound")
        )
        P = region.parent
        if not param and all(x in P.vertices for x in P.lattice_points()):
            g = LaurentPoly.constant(1, BaseRing.integers(), f.nvars)
            table["bhs"] = lambda: expansion.verify_bhs(f, g, b, p, s_max, samples)
    if not param:
        table["trace"] = lambda: zeta.verify_trace_congruence(f, p, s_max)
    if "fgl_degree" in spec.verify and p > 2:
        D = spec.verify["fgl_degree"]

        def fgl_check() -> Report:
            log = fgl.fgl_logarithm(f, region, p, D)
            return fgl.verify_fgl_integrality(fgl.fgl_group_law(log), p)

        table["fgl"] = fgl_check
        table["fgl-functional"] = lambda: fgl.verify_functional_equation(f, region, p, D, cap)
    return table


def cmd_verify(spec: ProblemSpec, args, out: Output) -> None:
    table = verifier_table(spec, args.seed)
    names = args.names or ["all"]
    if names == ["all"]:
        names = list(table)
    unknown = [n for n in names if n not in table]
    if unknown:
        raise CrystalError(f"unknown or inapplicable verifier(s): {', '.join(unknown)}", available=list(table))
    for name in names:
        try:
            out.report(table[name]())
        except CrystalError as exc:
            if getattr(exc, "skippable", False) or type(exc).__name__ in ("NotInvertibleModP", "PreconditionFailed"):
                out.report(skipped(name, spec.prime, spec.precision, str(exc), **exc.details))
            else:
                raise


def cmd_expand(spec: ProblemSpec, args, out: Output) -> None:
    if spec.expansion is None:
        raise CrystalError("the problem has no [expansion] section")
    f, region, p, s, cap = _context(spec)
    b = tuple(spec.expansion["vertex"])
    D = args.degree if args.degree is not None else spec.expansion.get("degree_bound", 6)
    dumps_ = []
    for u in region.lattice_points:
        g = LaurentPoly.monomial(u, f.ring)
        ex = expansion.expand(f, g, 1, b, D, p, s, cap)
        out.text(f"x^{u} / f at vertex {b}, grade <= {D}:")
        for k in ex.window():
            out.text(f"  {list(k)}: {_fmt(ex.ring.to_element(ex.coefficients[k]))}")
        dumps_.append({"u": list(u), "expansion": ex.to_dict()})
    out.payload["expansions"] = dumps_


def cmd_fgl(spec: ProblemSpec, args, out: Output) -> None:
    f, region, p, s, cap = _context(spec)
    D = args.degree or spec.verify.get("fgl_degree", p + 2)
    log = fgl.fgl_logarithm(f, region, p, D)
    G = fgl.fgl_group_law(log)
    for i, comp in enumerate(G):
        out.text(f"G_{i} through degree {D}: {len(comp.terms)} terms")
    out.report(fgl.verify_fgl_integrality(G, p))
    out.report(fgl.verify_fgl_axioms(log, G))
    out.payload["group_law"] = [c.to_dict() for c in G]


def cmd_count(spec: ProblemSpec, args, out: Output) -> None:
    f = spec.polynomial()
    if spec.has_parameter:
        raise CrystalError("give parameter_value to count points")
    s = args.s or spec.precision
    pc = zeta.count_points(f, spec.prime, s)
    out.text(f"over F_{spec.prime}^{s}: zeros on the torus {pc.hypersurface_count}, complement {pc.torus_count}")
    out.payload["count"] = pc.to_dict()


def cmd_trace(spec: ProblemSpec, args, out: Output) -> None:
    f = spec.polynomial()
    if spec.has_parameter:
        raise CrystalError("give parameter_value for the trace congruence")
    out.report(zeta.verify_trace_congruence(f, spec.prime, spec.s_max))


def cmd_legendre(spec: ProblemSpec | None, args, out: Output) -> None:
    p = args.prime or (spec.prime if spec else 5)
    s = args.precision or (spec.precision if spec else 2)
    z0 = args.z0 if args.z0 is not None else (spec.parameter_value if spec and spec.parameter_value is not None else 2)
    out.report(zeta.verify_legendre_unit_root(z0, p, s))
    out.report(zeta.verify_hypergeometric_stability(z0, p, s))


def cmd_show(spec: ProblemSpec, args, out: Output) -> None:
    sys.stdout.write(dumps_toml(spec))


COMMANDS = {
    "beta": cmd_beta,
    "hasse-witt": cmd_hasse_witt,
    "lambda": cmd_lambda,
    "connection": cmd_connection,
    "verify": cmd_verify,
    "expand": cmd_expand,
    "fgl": cmd_fgl,
    "count": cmd_count,
    "trace": cmd_trace,
    "legendre": cmd_legendre,
    "show": cmd_show,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="p-adic precision s (overrides the file)")
    common.add_argument("--series-cap", type=int, help="t-adic truncation for parameter families")
    common.add_argument("--seed", type=int, help="seed for randomized sampling")
    common.add_argument("--json", metavar="PATH", help="write a JSON report ('-' for stdout)")

    parser = argparse.ArgumentParser(prog="dworkcrystal", description="Unit-root crystals of Laurent polynomials: computations and congruence checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, spec_required=True):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument("spec", nargs=None if spec_required else "?", help="problem file (TOML/JSON) or bundled fixture name")
        return sp

    add("beta", "print beta_m").add_argument("--m", type=int, required=True)
    add("hasse-witt", "print the Hasse-Witt matrix with face annotations")
    add("lambda", "print the Frobenius matrix")
    add("connection", "print the connection matrix")
    v = add("verify", "run verifiers (all, or the named ones)")
    v.add_argument("names", nargs="*", help="verifier names, or 'all'")
    add("expand", "expansion coefficients at the problem's vertex").add_argument("--degree", type=int)
    add("fgl", "formal group law and integrality").add_argument("--degree", type=int)
    add("count", "count torus zeros over F_{p^s}").add_argument("--s", type=int)
    add("trace", "trace congruence against point counts")
    lg = add("legendre", "unit root of y^2 = x(x-1)(x-z0)", spec_required=False)
    lg.add_argument("--z0", type=int)
    lg.add_argument("--prime", type=int)
    add("show", "print the problem as normalized TOML")
    sub.add_parser("fixtures", help="list bundled fixtures")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if args.command == "fixtures":
        for name in bundled_fixtures():
            print(name)
        return EXIT_OK
    out = Output(getattr(args, "json", None))
    spec = None
    try:
        if args.spec is not None:
            spec = apply_overrides(load(args.spec), args)
        COMMANDS[args.command](spec, args, out)
    except CrystalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.details:
            print(f"details: {to_jsonable(exc.details)}", file=sys.stderr)
        if out.json_path:
            out.payload["error"] = exc.payload()
            out.payload["outcome"] = "error"
            out.finish(args.command, spec)
        return EXIT_ERROR
    return out.finish(args.command, spec)


if __name__ == "__main__":
    sys.exit(main())
