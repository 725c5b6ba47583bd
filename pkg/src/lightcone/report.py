"""Structured, machine-readable run reports.

A report is a flat list of named checks; verdicts derive only from the
recorded value and threshold so a saved report can be re-judged offline.
Serialization is JSON with complex numbers encoded as [re, im] pairs.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.complexfloating):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    return str(v)


@dataclass
class Check:
    """A single named measurement with an optional pass threshold.

    verdict is "PASS"/"FAIL" when a threshold applies, "INFO" for
    report-only values, "ERROR" when the computation raised.
    """

    name: str
    value: object = None
    threshold: float = None
    verdict: str = "INFO"
    source: str = ""
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "value": _jsonable(self.value),
            "threshold": self.threshold,
            "verdict": self.verdict,
            "source": self.source,
            "detail": _jsonable(self.detail),
        }


@dataclass
class Report:
    """Ordered collection of checks plus run metadata."""

    command: str
    meta: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    started: float = field(default_factory=time.time)
    wall_time: float = 0.0

    def add(self, name, value=None, threshold=None, source="", detail=None,
            lower_is_pass=True):
        """Record a check; the verdict is computed from value vs threshold."""
        verdict = "INFO"
        if threshold is not None and isinstance(value, (int, float)):
            ok = value <= threshold if lower_is_pass else value >= threshold
            verdict = "PASS" if ok else "FAIL"
        self.checks.append(Check(name=name, value=value, threshold=threshold,
                                 verdict=verdict, source=source,
                                 detail=detail or {}))
        return self.checks[-1]

    def add_error(self, name, exc, source=""):
        self.checks.append(Check(name=name, value=repr(exc), verdict="ERROR",
                                 source=source))
        return self.checks[-1]

    def finish(self):
        self.wall_time = time.time() - self.started
        return self

    @property
    def all_pass(self):
        return all(c.verdict in ("PASS", "INFO") for c in self.checks)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "meta": _jsonable(self.meta),
            "wall_time": self.wall_time,
            "all_pass": self.all_pass,
            "checks": [c.to_dict() for c in self.checks],
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def load(path):
        with open(path) as fh:
            data = json.load(fh)
        rep = Report(command=data["command"], meta=data["meta"])
        rep.wall_time = data["wall_time"]
        for c in data["checks"]:
            rep.checks.append(Check(name=c["name"], value=c["value"],
                                    threshold=c["threshold"],
                                    verdict=c["verdict"], source=c["source"],
                                    detail=c["detail"]))
        return rep
