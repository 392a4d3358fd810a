"""Violation and note records produced by constraint verification"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

Binding = Tuple[Tuple[str, str], ...]

FUNCTIONAL = "functional"
GENERIC = "generic"

_RECORD_FIELDS = (
    "constraint", "kind", "step", "anchor", "constraint_index", "binding", "detail",
    "rule", "observed_true", "observed_false", "required", "window", "subformula",
    "initial_state",
)


def format_binding(binding: Binding) -> str:
    return ", ".join(f"{var}={cid}" for var, cid in binding)


@dataclass(frozen=True)
class Violation:
    constraint: str
    kind: str
    step: int
    detail: str
    anchor: int = 0
    constraint_index: int = -1
    binding: Binding = ()
    rule: Optional[str] = None
    observed_true: Optional[int] = None
    observed_false: Optional[int] = None
    required: Optional[int] = None
    window: Optional[int] = None
    subformula: str = ""
    initial_state: Optional[str] = None

    @property
    def identity(self) -> tuple:
        return (self.constraint_index, self.anchor, self.binding)

    def sort_key(self) -> tuple:
        return (self.step, self.constraint_index, self.anchor, self.binding, self.rule or "")

    def with_state(self, name: str) -> "Violation":
        values = asdict(self)
        values["initial_state"] = name
        values["binding"] = self.binding
        return Violation(**values)

    def describe(self) -> str:
        """One-line human readable description, stable for a given trace"""
        head = f"step {self.step}: " + (
            f"[{self.rule}] " if self.kind == GENERIC else ""
        ) + self.constraint
        parts = [head]
        if self.binding:
            parts.append(f"for {format_binding(self.binding)}")
        if self.detail:
            parts.append(f"({self.detail})")
        return " ".join(parts)

    def to_record(self) -> dict:
        record = {name: getattr(self, name) for name in _RECORD_FIELDS}
        record["binding"] = [list(pair) for pair in self.binding]
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Violation":
        values = {name: record[name] for name in _RECORD_FIELDS if name in record}
        values["binding"] = tuple(tuple(pair) for pair in record.get("binding", ()))
        return cls(**values)


@dataclass(frozen=True)
class Note:
    """Informational outcome, e.g. an obligation cancelled because a component left"""
    constraint: str
    constraint_index: int
    anchor: int
    step: int
    message: str
    binding: Binding = field(default=())

    def describe(self) -> str:
        where = f" for {format_binding(self.binding)}" if self.binding else ""
        return f"step {self.step}: {self.constraint}{where}: {self.message}"


def sort_violations(violations) -> list:
    return sorted(violations, key=Violation.sort_key)
