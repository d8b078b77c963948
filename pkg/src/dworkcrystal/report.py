"""Verification reports and their deterministic JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .ring import PAdicScalar, ParamSeries, RingMatrix

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class Report:
    """Outcome of one verifier run.

    ``witnesses`` lists violations (empty on success); ``details`` carries
    anything else worth printing (precision reached, counts, values).
    """

    congruence: str
    p: int | None
    s: Any
    m: Any = None
    region: str | None = None
    status: str = PASS
    witnesses: list[dict] = field(default_factory=list)
    checks: int = 0
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def fail(self, **witness) -> None:
        self.status = FAIL
        self.witnesses.append(witness)

    def to_dict(self) -> dict:
        return to_jsonable(
            {
                "congruence": self.congruence,
                "p": self.p,
                "s": self.s,
                "m": self.m,
                "region": self.region,
                "status": self.status,
                "checks": self.checks,
                "witnesses": self.witnesses,
                "details": self.details,
            }
        )

    def summary(self) -> str:
        line = f"{self.congruence:<32} {self.status:<8} checks={self.checks}"
        if self.region:
            line += f" region={self.region}"
        if self.status == SKIPPED and "reason" in self.details:
            line += f" ({self.details['reason']})"
        if self.witnesses:
            line += f" first violation: {to_jsonable(self.witnesses[0])}"
        return line


def skipped(congruence: str, p: int | None, s: Any, reason: str, **details) -> Report:
    return Report(congruence, p, s, status=SKIPPED, details={"reason": reason, **details})


def to_jsonable(obj: Any) -> Any:
    """Integers become decimal strings so large values survive any JSON reader."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, PAdicScalar):
        return {"value": str(obj.value), "modulus": f"{obj.prime}^{obj.precision}"}
    if isinstance(obj, ParamSeries):
        return {
            "terms": {str(k): str(c) for k, c in sorted(obj.terms().items())},
            "t_precision": None if obj.cap is None else str(obj.cap),
            "modulus": None if obj.precision is None else f"{obj.prime}^{obj.precision}",
        }
    if isinstance(obj, RingMatrix):
        return {
            "labels": None if obj.labels is None else [to_jsonable(list(x)) for x in obj.labels],
            "rows": [[to_jsonable(x) for x in r] for r in obj.rows],
        }
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return str(obj)


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)
