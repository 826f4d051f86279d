"""Machine-readable verification reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

PASS, FAIL, MEASURED = "PASS", "FAIL", "MEASURED"


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class Report:
    check: str
    rank: int
    window: dict = field(default_factory=dict)
    status: str = PASS
    measured: dict | None = None
    counterexample: str | None = None
    notes: list[str] = field(default_factory=list)
    elapsed_ms: int = 0

    @property
    def ok(self) -> bool:
        return self.status in (PASS, MEASURED)

    def fail(self, message: str, counterexample: str) -> "Report":
        # keep the first counterexample only
        if self.status != FAIL:
            self.status = FAIL
            self.counterexample = counterexample
        self.notes.append(message)
        return self

    def to_dict(self, stable: bool = False) -> dict:
        out = {
            "check": self.check,
            "rank": self.rank,
            "window": _jsonable(self.window),
            "status": self.status,
        }
        if self.measured is not None:
            out["measured"] = _jsonable(self.measured)
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.notes:
            out["notes"] = list(self.notes)
        if not stable:
            out["elapsed_ms"] = self.elapsed_ms
        return out

    def to_json(self, stable: bool = False) -> str:
        return json.dumps(self.to_dict(stable), sort_keys=True)

    def to_text(self, stable: bool = False) -> str:
        parts = [f"{self.status:8s} {self.check} rank={self.rank}"]
        if self.window:
            parts.append(" ".join(f"{k}={_jsonable(v)}" for k, v in sorted(self.window.items())))
        if self.measured:
            parts.append("measured " + json.dumps(_jsonable(self.measured), sort_keys=True))
        if not stable:
            parts.append(f"({self.elapsed_ms} ms)")
        line = "  ".join(parts)
        for note in self.notes:
            line += f"\n    {note}"
        if self.counterexample:
            line += "\n    counterexample: " + self.counterexample.replace("\n", " + ")
        return line
