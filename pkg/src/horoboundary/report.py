"""Result bundles and their canonical serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import canonical_float

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}


@dataclass
class Report:
    analysis: str = ""
    seed: int = 0
    space: dict = None
    map: dict = None
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    inconclusive: list = field(default_factory=list)

    def check(self, name, passed, value=None, tolerance=None, source="artifact default"):
        """Record one pass/fail decision with its tolerance and where that tolerance came from."""
        self.checks.append({"name": name, "passed": bool(passed), "value": value,
                            "tolerance": tolerance, "threshold_source": source})
        return bool(passed)

    def mark_inconclusive(self, name, message, detail=None):
        self.inconclusive.append({"name": name, "message": str(message), "detail": detail or {}})

    @property
    def status(self):
        if any(not c["passed"] for c in self.checks):
            return FAIL
        if self.inconclusive:
            return INCONCLUSIVE
        return PASS

    @property
    def exit_code(self):
        return EXIT_CODES[self.status]

    def to_dict(self):
        return {"analysis": self.analysis, "seed": self.seed, "space": self.space, "map": self.map,
                "status": self.status, "checks": self.checks, "results": self.results,
                "inconclusive": self.inconclusive}


def canonical(obj):
    """Plain-JSON form: 12 significant digits, non-finite floats as strings, complex as pairs."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [canonical(obj.real), canonical(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return canonical_float(x) + 0.0
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "real") and hasattr(obj, "imag"):
        return canonical(complex(obj))
    try:
        return canonical(float(obj))
    except (TypeError, ValueError):
        return str(obj)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def emit_report(report, fmt="json"):
    """Serialize to bytes.  JSON is canonical (sorted keys); CSV lists scalar leaves as ``key,value``."""
    data = canonical(report.to_dict() if isinstance(report, Report) else report)
    if fmt == "json":
        return (json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(data):
            w.writerow([k, "" if v is None else v if isinstance(v, str) else json.dumps(v)])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")
