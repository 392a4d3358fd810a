"""
Snapshots and traces, with the line-delimited JSON trace file format.
One snapshot per line: {step, components, ensembles, beyond_control}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from fcl.errors import TraceFormatError

SNAPSHOT_FIELDS = {"step", "components", "ensembles", "beyond_control"}
COMPONENT_FIELDS = {"type", "attrs"}


@dataclass(frozen=True)
class ComponentState:
    type: str
    attrs: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class Snapshot:
    step: int
    components: Mapping[str, ComponentState] = field(default_factory=dict)
    ensembles: Mapping[str, FrozenSet[str]] = field(default_factory=dict)
    beyond_control: Mapping[str, Mapping[str, object]] = field(default_factory=dict)

    def of_type(self, type_name: str) -> FrozenSet[str]:
        return frozenset(cid for cid, c in self.components.items() if c.type == type_name)

    def ensemble_family(self, name: str) -> Tuple[bool, FrozenSet[str]]:
        """Union of all instances `name:<x>`; first element tells whether any exists"""
        prefix = name + ":"
        members = set()
        found = False
        for eid, ids in self.ensembles.items():
            if eid.startswith(prefix):
                found = True
                members |= ids
        return found, frozenset(members)

    def to_record(self) -> dict:
        return {
            "step": self.step,
            "components": {
                cid: {"type": c.type, "attrs": dict(c.attrs)}
                for cid, c in self.components.items()
            },
            "ensembles": {eid: sorted(ids) for eid, ids in self.ensembles.items()},
            "beyond_control": {name: dict(attrs) for name, attrs in self.beyond_control.items()},
        }

    @classmethod
    def from_record(cls, record: dict) -> "Snapshot":
        if not isinstance(record, dict):
            raise TraceFormatError("snapshot record must be an object")
        unknown = set(record) - SNAPSHOT_FIELDS
        if unknown:
            raise TraceFormatError(f"unknown snapshot fields: {', '.join(sorted(unknown))}")
        step = record.get("step")
        if not isinstance(step, int) or isinstance(step, bool) or step < 0:
            raise TraceFormatError("snapshot needs a non-negative integer step")
        components = {}
        for cid, comp in _mapping(record, "components").items():
            if not isinstance(comp, dict) or set(comp) - COMPONENT_FIELDS or "type" not in comp \
                    or not isinstance(comp.get("attrs", {}), dict):
                raise TraceFormatError(f"component {cid!r} must be {{type, attrs}}")
            components[cid] = ComponentState(comp["type"], dict(comp.get("attrs", {})))
        ensembles = {}
        for eid, ids in _mapping(record, "ensembles").items():
            if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
                raise TraceFormatError(f"ensemble {eid!r} must be a list of component ids")
            ensembles[eid] = frozenset(ids)
        beyond = {}
        for name, attrs in _mapping(record, "beyond_control").items():
            if not isinstance(attrs, dict):
                raise TraceFormatError(f"beyond-control component {name!r} must be an object")
            beyond[name] = dict(attrs)
        return cls(step, components, ensembles, beyond)


def _mapping(record: dict, key: str) -> dict:
    value = record.get(key, {})
    if not isinstance(value, dict):
        raise TraceFormatError(f"'{key}' must be an object")
    return value


def dumps_snapshot(snapshot: Snapshot) -> str:
    return json.dumps(snapshot.to_record(), sort_keys=True, separators=(",", ":"))


def validate_trace(snapshots: Sequence[Snapshot]) -> None:
    if not snapshots:
        raise TraceFormatError("a trace needs at least one snapshot")
    for expected, snapshot in enumerate(snapshots):
        if snapshot.step != expected:
            raise TraceFormatError(f"expected step {expected}, found step {snapshot.step}")


def loads_trace(text: str) -> List[Snapshot]:
    snapshots = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {number}: {exc.msg}") from exc
        snapshots.append(Snapshot.from_record(record))
    validate_trace(snapshots)
    return snapshots


def dumps_trace(snapshots: Iterable[Snapshot]) -> str:
    return "".join(dumps_snapshot(s) + "\n" for s in snapshots)


def read_trace(path: str) -> List[Snapshot]:
    with open(path, "r", encoding="utf-8") as handle:
        return loads_trace(handle.read())


def write_trace(path: str, snapshots: Iterable[Snapshot]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_trace(snapshots))
