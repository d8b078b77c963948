"""Problem definition files (TOML or JSON) and their validation."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import tomli

from .errors import ConfigurationError
from .laurent import LaurentPoly
from .polytope import (
    NewtonPolytope,
    Region,
    build_polytope,
    faces_complement_region,
    full_region,
    interior_region,
    level_region,
    one_vertex_region,
    region_from_points,
)
from .ring import BaseRing

_int_list = {"type": "array", "items": {"type": "integer"}}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "problem definition",
    "type": "object",
    "required": ["prime", "terms"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "prime": {"type": "integer", "minimum": 2},
        "precision": {"type": "integer", "minimum": 1},
        "series_cap": {"type": "integer", "minimum": 2},
        "frobenius": {"enum": ["id", "t->t^p"]},
        "derivation": {"enum": ["none", "d/dt", "theta", "t*d/dt"]},
        "parameter_value": {"type": "integer"},
        "terms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["exponents", "coeff"],
                "additionalProperties": False,
                "properties": {
                    "exponents": {**_int_list, "minItems": 1},
                    "coeff": {
                        "oneOf": [
                            {"type": "integer"},
                            {
                                "type": "object",
                                "required": ["poly"],
                                "additionalProperties": False,
                                "properties": {"poly": {**_int_list, "minItems": 1}},
                            },
                        ]
                    },
                },
            },
        },
        "region": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["interior", "full", "level", "vertex", "faces-complement", "points"]},
                "level": {"type": "integer", "minimum": 0},
                "vertex": _int_list,
                "faces": {"type": "array", "items": {"type": "array", "items": _int_list}},
                "points": {"type": "array", "items": _int_list},
            },
        },
        "expansion": {
            "type": "object",
            "required": ["vertex"],
            "additionalProperties": False,
            "properties": {
                "vertex": _int_list,
                "degree_bound": {"type": "integer", "minimum": 0},
                "samples": {"type": "array", "items": _int_list},
                "numerator": {"type": "array", "items": {"type": "object"}},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "s_max": {"type": "integer", "minimum": 1},
                "m_list": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "fgl_degree": {"type": "integer", "minimum": 1},
                "pole_cap": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DERIVATION_ALIASES = {"t*d/dt": "theta", "theta": "theta", "d/dt": "d/dt", "none": "none"}


@dataclass
class ProblemSpec:
    """A validated problem definition."""

    prime: int
    terms: list[tuple[tuple[int, ...], Any]]
    precision: int = 2
    series_cap: int | None = None
    frobenius: str = "id"
    derivation: str = "theta"
    parameter_value: int | None = None
    region: dict = field(default_factory=lambda: {"kind": "interior"})
    expansion: dict | None = None
    verify: dict = field(default_factory=dict)
    name: str = ""
    description: str = ""

    @property
    def has_parameter(self) -> bool:
        return any(isinstance(c, tuple) for _, c in self.terms) and self.parameter_value is None

    @property
    def nvars(self) -> int:
        return len(self.terms[0][0])

    def polynomial(self) -> LaurentPoly:
        """f over exact integers; symbolic in t unless a parameter value is given."""
        if self.has_parameter:
            ring = BaseRing.series(None, None, None)
            return LaurentPoly.from_terms([(e, c if isinstance(c, tuple) else (c,)) for e, c in self.terms], ring, self.nvars)
        ring = BaseRing.integers()
        t = self.parameter_value
        pairs = []
        for e, c in self.terms:
            if isinstance(c, tuple):
                c = sum(a * t**k for k, a in enumerate(c))
            pairs.append((e, c))
        return LaurentPoly.from_terms(pairs, ring, self.nvars)

    def polytope(self) -> NewtonPolytope:
        return build_polytope(self.polynomial().support())

    def build_region(self) -> Region:
        P = self.polytope()
        r = self.region
        kind = r["kind"]
        if kind == "interior":
            return interior_region(P)
        if kind == "full":
            return full_region(P)
        if kind == "level":
            if "level" not in r:
                raise ConfigurationError("region kind 'level' needs a 'level' field")
            return level_region(P, r["level"])
        if kind == "vertex":
            if "vertex" not in r:
                raise ConfigurationError("region kind 'vertex' needs a 'vertex' field")
            return one_vertex_region(P, r["vertex"])
        if kind == "faces-complement":
            return faces_complement_region(P, r.get("faces", []))
        if kind == "points":
            return region_from_points(P, r.get("points", []))
        raise ConfigurationError(f"unknown region kind {kind!r}")

    @property
    def series_cap_value(self) -> int | None:
        if not self.has_parameter:
            return None
        return self.series_cap if self.series_cap is not None else 16

    @property
    def s_max(self) -> int:
        return self.verify.get("s_max", self.precision)

    @property
    def m_list(self) -> list[int]:
        return self.verify.get("m_list", [1, 2, 3])

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        if self.name:
            out["name"] = self.name
        if self.description:
            out["description"] = self.description
        out["prime"] = self.prime
        out["precision"] = self.precision
        if self.series_cap is not None:
            out["series_cap"] = self.series_cap
        out["frobenius"] = self.frobenius
        out["derivation"] = self.derivation
        if self.parameter_value is not None:
            out["parameter_value"] = self.parameter_value
        out["terms"] = [
            {"exponents": list(e), "coeff": {"poly": list(c)} if isinstance(c, tuple) else c} for e, c in self.terms
        ]
        out["region"] = copy.deepcopy(self.region)
        if self.expansion is not None:
            out["expansion"] = copy.deepcopy(self.expansion)
        if self.verify:
            out["verify"] = copy.deepcopy(self.verify)
        return out


def validate(data: dict) -> None:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"invalid problem definition at {where}: {exc.message}", path=where) from None


def from_dict(data: dict) -> ProblemSpec:
    validate(data)
    terms = []
    nvars = None
    for t in data["terms"]:
        e = tuple(t["exponents"])
        if nvars is None:
            nvars = len(e)
        elif len(e) != nvars:
            raise ConfigurationError("all exponent vectors must have the same length", exponents=list(e))
        c = t["coeff"]
        terms.append((e, tuple(c["poly"]) if isinstance(c, dict) else c))
    has_param = any(isinstance(c, tuple) for _, c in terms) and "parameter_value" not in data
    frob = data.get("frobenius", "t->t^p" if has_param else "id")
    if has_param and frob == "id":
        raise ConfigurationError("the identity is not a Frobenius lift on series in t; use 't->t^p'")
    deriv = DERIVATION_ALIASES[data.get("derivation", "theta" if has_param else "none")]
    spec = ProblemSpec(
        prime=data["prime"],
        terms=terms,
        precision=data.get("precision", 2),
        series_cap=data.get("series_cap"),
        frobenius=frob,
        derivation=deriv,
        parameter_value=data.get("parameter_value"),
        region=copy.deepcopy(data.get("region", {"kind": "interior"})),
        expansion=copy.deepcopy(data.get("expansion")),
        verify=copy.deepcopy(data.get("verify", {})),
        name=data.get("name", ""),
        description=data.get("description", ""),
    )
    if spec.expansion is not None and len(spec.expansion["vertex"]) != nvars:
        raise ConfigurationError("expansion vertex has the wrong dimension")
    return spec


def parse_text(text: str, hint: str = "") -> dict:
    """TOML or JSON, chosen by file suffix or else by the first character."""
    stripped = text.lstrip()
    as_json = hint.endswith(".json") or (not hint.endswith(".toml") and stripped.startswith("{"))
    try:
        return json.loads(text) if as_json else tomli.loads(text)
    except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {'JSON' if as_json else 'TOML'}: {exc}") from None


def bundled_fixtures() -> list[str]:
    base = resources.files("dworkcrystal") / "data"
    return sorted(p.name[: -len(".toml")] for p in base.iterdir() if p.name.endswith(".toml"))


def load(path_or_name: str) -> ProblemSpec:
    """Load a problem file, or a bundled fixture by name (e.g. ``legendre``)."""
    path = Path(path_or_name)
    if path.exists():
        return from_dict(parse_text(path.read_text(), path.name))
    name = path_or_name.removesuffix(".toml")
    res = resources.files("dworkcrystal") / "data" / f"{name}.toml"
    if res.is_file():
        return from_dict(parse_text(res.read_text(), res.name))
    raise ConfigurationError(f"no such problem file or bundled fixture: {path_or_name}", available=bundled_fixtures())


def dumps_toml(spec: ProblemSpec) -> str:
    """A TOML rendering of the spec that parses back to the same spec."""
    d = spec.to_dict()
    lines = []
    for key in ("name", "description", "prime", "precision", "series_cap", "frobenius", "derivation", "parameter_value"):
        if key in d:
            lines.append(f"{key} = {_toml_value(d[key])}")
    for section in ("region", "expansion", "verify"):
        if section in d:
            lines.append("")
            lines.append(f"[{section}]")
            for k, v in d[section].items():
                lines.append(f"{k} = {_toml_value(v)}")
    for t in d["terms"]:
        lines.append("")
        lines.append("[[terms]]")
        lines.append(f"exponents = {_toml_value(t['exponents'])}")
        c = t["coeff"]
        lines.append(f"coeff = {{ poly = {_toml_value(c['poly'])} }}" if isinstance(c, dict) else f"coeff = {c}")
    return "\n".join(lines) + "\n"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{ " + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + " }"
    raise ConfigurationError(f"cannot render {v!r} as TOML")
