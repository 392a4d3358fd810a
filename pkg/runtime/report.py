"""
Violation reports: everything a verification batch found, across initial
states, with the metrics of every run. Stored as JSON lines.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from fcl.violations import FUNCTIONAL, GENERIC, Note, Violation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunSummary:
    initial_state: str
    seed: int
    stop_reason: str
    steps: int
    metrics: Dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_record(cls, record: dict) -> "RunSummary":
        return cls(record["initial_state"], record["seed"], record["stop_reason"],
                   record["steps"], dict(record.get("metrics", {})))


def _note_record(note: Note) -> dict:
    record = dataclasses.asdict(note)
    record["binding"] = [list(pair) for pair in note.binding]
    return record


def _note_from_record(record: dict) -> Note:
    values = dict(record)
    values["binding"] = tuple(tuple(pair) for pair in record.get("binding", ()))
    return Note(**values)


@dataclass
class ViolationReport:
    violations: List[Violation] = field(default_factory=list)
    notes: List[Note] = field(default_factory=list)
    runs: List[RunSummary] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        """An AM is valid when no run violated anything"""
        return not self.violations

    def of_kind(self, kind: str) -> List[Violation]:
        return [v for v in self.violations if v.kind == kind]

    @property
    def generic(self) -> List[Violation]:
        return self.of_kind(GENERIC)

    @property
    def functional(self) -> List[Violation]:
        return self.of_kind(FUNCTIONAL)

    def deduplicated(self) -> List[Violation]:
        """The earliest violation per (constraint, binding)"""
        seen = set()
        unique = []
        for violation in self.violations:
            key = (violation.constraint, violation.binding)
            if key not in seen:
                seen.add(key)
                unique.append(violation)
        return unique

    def extend(self, other: "ViolationReport") -> None:
        self.violations.extend(other.violations)
        self.notes.extend(other.notes)
        self.runs.extend(other.runs)

    # --- records ---

    def to_record(self) -> dict:
        return {
            "valid": self.valid,
            "runs": [run.to_record() for run in self.runs],
            "violations": [v.to_record() for v in self.violations],
            "notes": [_note_record(n) for n in self.notes],
        }

    @classmethod
    def from_record(cls, record: dict) -> "ViolationReport":
        return cls(
            violations=[Violation.from_record(v) for v in record.get("violations", [])],
            notes=[_note_from_record(n) for n in record.get("notes", [])],
            runs=[RunSummary.from_record(r) for r in record.get("runs", [])],
        )

    def dumps(self) -> str:
        """JSON lines: a header record with the run summaries and notes, then one violation per line"""
        header = {
            "valid": self.valid,
            "runs": [run.to_record() for run in self.runs],
            "notes": [_note_record(n) for n in self.notes],
            "violation_count": len(self.violations),
        }
        lines = [json.dumps(header, sort_keys=True)]
        lines.extend(json.dumps(v.to_record(), sort_keys=True) for v in self.violations)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ViolationReport":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ValueError("empty violation report")
        try:
            header = json.loads(lines[0])
            violations = [Violation.from_record(json.loads(line)) for line in lines[1:]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"malformed violation report: {exc}") from exc
        if not isinstance(header, dict) or header.get("violation_count") != len(violations):
            raise ValueError("violation report header does not match its records")
        return cls(
            violations=violations,
            notes=[_note_from_record(n) for n in header.get("notes", [])],
            runs=[RunSummary.from_record(r) for r in header.get("runs", [])],
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.dumps())
        logger.info("report saved to %s", path)

    @classmethod
    def load(cls, path: str) -> "ViolationReport":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.loads(handle.read())

    # --- text ---

    def render_text(self) -> str:
        lines = []
        for run in self.runs:
            metrics = ", ".join(f"{k}={_metric(v)}" for k, v in run.metrics.items())
            lines.append(
                f'initial state "{run.initial_state}" (seed {run.seed}): '
                f"{run.stop_reason} after {run.steps} steps; {metrics}"
            )
        if self.valid:
            lines.append("no violations")
        else:
            lines.append(f"{len(self.violations)} violations:")
            for violation in self.violations:
                lines.append("  " + _describe(violation))
        if self.notes:
            lines.append("notes:")
            lines.extend("  " + note.describe() for note in self.notes)
        return "\n".join(lines) + "\n"


def _metric(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _describe(violation: Violation) -> str:
    text = violation.describe()
    if violation.initial_state:
        text = f'[{violation.initial_state}] {text}'
    return text
