"""Structured pass/fail records for theorem and lemma checks.

A CertificateReport captures one executable check: the identifier of the
statement being exercised, the verdict, the witnessing level set (when one
exists), the two sides of the decisive inequality, and every intermediate
scalar a reviewer needs to replay the arithmetic.  Failing reports must
carry a concrete violated inequality with both sides evaluated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

# absolute + relative slack applied to every certified inequality,
# absorbing eigenpair residual propagation
SLACK_ABS = 1e-8
SLACK_REL = 1e-8


def leq_with_slack(lhs: float, rhs: float,
                   abs_slack: float = SLACK_ABS,
                   rel_slack: float = SLACK_REL) -> bool:
    return lhs <= rhs + abs_slack + rel_slack * abs(rhs)


@dataclass
class CertificateReport:
    theorem_id: str
    passed: bool
    witness: dict[str, Any] | None = None
    lhs: float | None = None
    rhs: float | None = None
    details: dict[str, Any] = field(default_factory=dict)
    violation: dict[str, Any] | None = None

    def __post_init__(self):
        if not self.passed and self.violation is None:
            raise ValueError("failing report must carry a concrete violation")

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem_id": self.theorem_id,
            "pass": self.passed,
            "witness": self.witness,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "details": _plain(self.details),
            "violation": _plain(self.violation),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _plain(obj):
    """Coerce numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if hasattr(obj, "item") and getattr(obj, "ndim", 1) == 0:
        return _plain(obj.item())
    if hasattr(obj, "tolist"):
        return _plain(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return str(obj)


REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "CertificateReport",
    "type": "object",
    "required": ["theorem_id", "pass", "witness", "lhs", "rhs", "details"],
    "properties": {
        "theorem_id": {"type": "string"},
        "pass": {"type": "boolean"},
        "witness": {"type": ["object", "null"]},
        "lhs": {"type": ["number", "string", "null"]},
        "rhs": {"type": ["number", "string", "null"]},
        "details": {"type": "object"},
        "violation": {"type": ["object", "null"]},
        "graph": {"type": "object"},
        "suite": {"type": "string"},
        "task": {"type": "string"},
    },
    "additionalProperties": True,
}

CSV_CONTRACTS: dict[str, list[str]] = {
    "cheeger_ratios.csv": ["family", "n", "seed", "lambda2", "phi_sweep", "ratio"],
    "measured_constants.csv": ["family", "n", "seed", "bound", "value"],
}
