"""Verification reports and their JSON schema.

Every check reduces a batch of trials to per-trial *margins*: a trial passes
when its margin is at least ``-tolerance``.  Equalities use the negated
relative error, inequalities ``lhs <= rhs`` use ``(rhs - lhs) / scale`` and
order relations use the normalized smallest eigenvalue.  ``worst_margin`` is
the minimum over trials, so a report passes exactly when
``worst_margin >= -tolerance``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np


@dataclass
class VerificationReport:
    property: str
    trials: int
    failures: int
    worst_margin: float
    witness: dict | None = None
    tolerance: float | None = None
    vacuous: int = 0
    note: str | None = None
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    @property
    def skipped(self) -> bool:
        return self.trials == 0 and not self.checks

    def find(self, name):
        """Depth-first lookup of a sub-check by property name."""
        if self.property == name:
            return self
        for c in self.checks:
            hit = c.find(name)
            if hit is not None:
                return hit
        return None

    def failing(self):
        """Names of the leaf checks that recorded failures."""
        if not self.checks:
            return [self.property] if self.failures else []
        return [name for c in self.checks for name in c.failing()]

    def to_json(self) -> dict:
        out = {
            "property": self.property,
            "trials": int(self.trials),
            "failures": int(self.failures),
            "worst_margin": float(self.worst_margin),
            "witness": self.witness,
        }
        if self.tolerance is not None:
            out["tolerance"] = float(self.tolerance)
        if self.vacuous:
            out["vacuous"] = int(self.vacuous)
        if self.note:
            out["note"] = self.note
        if self.checks:
            out["checks"] = [c.to_json() for c in self.checks]
        return out

    @classmethod
    def from_json(cls, obj) -> "VerificationReport":
        return cls(
            property=obj["property"],
            trials=obj["trials"],
            failures=obj["failures"],
            worst_margin=obj["worst_margin"],
            witness=obj.get("witness"),
            tolerance=obj.get("tolerance"),
            vacuous=obj.get("vacuous", 0),
            note=obj.get("note"),
            checks=[cls.from_json(c) for c in obj.get("checks", [])],
        )

    def lines(self, indent=0):
        status = "skip" if self.skipped else ("PASS" if self.passed else "FAIL")
        pad = "  " * indent
        text = (f"{pad}{status} {self.property}: trials={self.trials} "
                f"failures={self.failures} worst_margin={self.worst_margin:.3e}")
        if self.vacuous:
            text += f" vacuous={self.vacuous}"
        if self.note:
            text += f" ({self.note})"
        out = [text]
        for c in self.checks:
            out.extend(c.lines(indent + 1))
        return out


def check(prop, margins, tol, witness=None, threshold=None, valid=None, note=None):
    """Reduce per-trial margins to a report.

    ``witness`` is a callable taking the index of the worst failing trial and
    returning a JSON-ready dict.  ``valid`` masks out vacuous trials (their
    hypothesis did not hold), which are counted but never fail.
    """
    margins = np.atleast_1d(np.asarray(margins, dtype=float))
    margins = np.where(np.isnan(margins), -np.inf, margins)
    if valid is None:
        valid = np.ones(margins.shape, dtype=bool)
    valid = np.broadcast_to(np.asarray(valid, dtype=bool), margins.shape)
    limit = -tol if threshold is None else threshold
    live = margins[valid]
    failed = valid & (margins < limit)
    worst = float(live.min()) if live.size else 0.0
    if not np.isfinite(worst):
        worst = -1e300
    wit = None
    if failed.any() and witness is not None:
        idx = int(np.flatnonzero(failed)[np.argmin(margins[failed])])
        wit = witness(idx)
    return VerificationReport(prop, int(margins.size), int(failed.sum()), worst, wit,
                              tolerance=float(tol), vacuous=int((~valid).sum()), note=note)


def combine(prop, checks, note=None) -> VerificationReport:
    """Parent report whose failures are the sum over ``checks``."""
    live = [c for c in checks if not c.skipped]
    trials = max((c.trials for c in live), default=0)
    failures = sum(c.failures for c in checks)
    worst = min((c.worst_margin for c in live), default=0.0)
    witness = next((c.witness for c in checks if c.failures and c.witness), None)
    return VerificationReport(prop, trials, failures, worst, witness, note=note, checks=list(checks))


def skipped(prop, note) -> VerificationReport:
    return VerificationReport(prop, 0, 0, 0.0, None, note=note)


VERIFICATION_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "urn:cstar-sip:verification-report",
    "type": "object",
    "required": ["property", "trials", "failures", "worst_margin", "witness"],
    "properties": {
        "property": {"type": "string"},
        "trials": {"type": "integer", "minimum": 0},
        "failures": {"type": "integer", "minimum": 0},
        "worst_margin": {"type": "number"},
        "witness": {"type": ["object", "null"]},
        "tolerance": {"type": "number"},
        "vacuous": {"type": "integer", "minimum": 0},
        "note": {"type": "string"},
        "checks": {"type": "array", "items": {"$ref": "#"}},
    },
    "additionalProperties": False,
}

RUN_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "urn:cstar-sip:run-report",
    "type": "object",
    "required": ["version", "seed", "trials", "overall", "suites"],
    "properties": {
        "version": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "fault_inject": {"type": ["string", "null"]},
        "policy": {"type": "object"},
        "overall": {"enum": ["pass", "fail"]},
        "suites": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["suite", "construction", "status", "report"],
                "properties": {
                    "suite": {"type": "string"},
                    "construction": {"type": "string"},
                    "status": {"enum": ["pass", "fail", "skipped"]},
                    "mandatory": {"type": "boolean"},
                    "report": {"$ref": "#/$defs/verification_report"},
                },
            },
        },
        "timing": {"type": "object", "additionalProperties": {"type": "number"}},
    },
    "$defs": {},
}


def _embedded_report_schema():
    sub = copy.deepcopy(VERIFICATION_REPORT_SCHEMA)
    del sub["$schema"], sub["$id"]
    sub["properties"]["checks"]["items"] = {"$ref": "#/$defs/verification_report"}
    return sub


RUN_REPORT_SCHEMA["$defs"]["verification_report"] = _embedded_report_schema()


def schemas() -> dict:
    return {"verification_report": VERIFICATION_REPORT_SCHEMA, "run_report": RUN_REPORT_SCHEMA}
