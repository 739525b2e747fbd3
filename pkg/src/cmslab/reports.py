"""Pass/fail records shared by the verification suites."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable


@dataclass
class Report:
    identity: str
    anchor: str
    parameters: dict[str, Any] = field(default_factory=dict)
    passed: bool = True
    witness: Any = None
    metrics: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["metrics"] = {k: _clean(v) for k, v in sorted(self.metrics.items())}
        d["parameters"] = {k: _clean(v) for k, v in sorted(self.parameters.items())}
        d["witness"] = _clean(self.witness)
        return d


def _clean(v):
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        # fixed formatting keeps reports byte-stable across platforms
        return float(f"{v:.6e}")
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in sorted(v.items())}
    if hasattr(v, "item") and callable(v.item):
        return _clean(v.item())
    return v


def bundle(reports: Iterable[Report], **meta) -> dict:
    reports = list(reports)
    return {
        "meta": {k: _clean(v) for k, v in sorted(meta.items())},
        "passed": all(r.passed for r in reports),
        "count": len(reports),
        "reports": [r.to_json() for r in reports],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
