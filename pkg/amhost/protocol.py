"""
AM wire protocol, version 1: one JSON record per line over stdin/stdout.

    host <- {"ready": true, "am": "SmartAdaptation"}
    host -> {"method": "assign_in_village", "step": 1, "components": [{"id": ..., "attrs": {...}}],
             "beyond_control": {"dragon": {"hp": 50}}, "group_ids": ["farm", "cave"]}
    host <- {"assignments": {"V01": "farm", "V02": ["farm", "cave"]}}
         or {"error": {"message": ..., "traceback": ...}}

A component assigned more than once is answered with the list of its groups.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from amhost.errors import MALFORMED_FRAME, AmHostError

PROTOCOL_VERSION = 1

GroupAssignment = Union[str, List[str]]


@dataclass(frozen=True)
class ComponentRecord:
    id: str
    attrs: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AssignRequest:
    method: str
    step: int
    components: Tuple[ComponentRecord, ...] = ()
    beyond_control: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    group_ids: Tuple[str, ...] = ()

    @property
    def component_ids(self) -> List[str]:
        return [c.id for c in self.components]

    def to_record(self) -> dict:
        return {
            "method": self.method,
            "step": self.step,
            "components": [{"id": c.id, "attrs": dict(c.attrs)} for c in self.components],
            "beyond_control": {name: dict(attrs) for name, attrs in self.beyond_control.items()},
            "group_ids": list(self.group_ids),
        }

    @classmethod
    def from_record(cls, record: Any) -> "AssignRequest":
        if not isinstance(record, dict) or not isinstance(record.get("method"), str) \
                or not isinstance(record.get("step"), int):
            raise AmHostError(MALFORMED_FRAME, "request needs a method and a step")
        components = []
        for item in record.get("components", []):
            if not isinstance(item, dict) or not isinstance(item.get("id"), str):
                raise AmHostError(MALFORMED_FRAME, "component records need an id")
            components.append(ComponentRecord(item["id"], dict(item.get("attrs", {}))))
        return cls(
            method=record["method"],
            step=record["step"],
            components=tuple(components),
            beyond_control={k: dict(v) for k, v in record.get("beyond_control", {}).items()},
            group_ids=tuple(record.get("group_ids", [])),
        )


@dataclass(frozen=True)
class AmFailure:
    """An exception raised by the AM, or a failure to load it"""
    message: str
    traceback: str = ""

    def to_record(self) -> dict:
        return {"message": self.message, "traceback": self.traceback}

    @classmethod
    def from_record(cls, record: Any) -> "AmFailure":
        if not isinstance(record, dict):
            return cls(str(record))
        return cls(str(record.get("message", "")), str(record.get("traceback", "")))


@dataclass(frozen=True)
class AssignResponse:
    assignments: Mapping[str, GroupAssignment] = field(default_factory=dict)
    error: Optional[AmFailure] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_record(self) -> dict:
        if self.error is not None:
            return {"error": self.error.to_record()}
        return {"assignments": {cid: group for cid, group in self.assignments.items()}}

    @classmethod
    def from_record(cls, record: Any) -> "AssignResponse":
        if not isinstance(record, dict):
            raise AmHostError(MALFORMED_FRAME, "response must be an object")
        if "error" in record:
            return cls(error=AmFailure.from_record(record["error"]))
        assignments = record.get("assignments")
        if not isinstance(assignments, dict):
            raise AmHostError(MALFORMED_FRAME, "response needs 'assignments' or 'error'")
        for cid, group in assignments.items():
            valid = isinstance(group, str) or (
                isinstance(group, list) and all(isinstance(g, str) for g in group)
            )
            if not valid:
                raise AmHostError(MALFORMED_FRAME, f"assignment of {cid!r} must be a group id or a list")
        return cls(assignments=dict(assignments))


@dataclass(frozen=True)
class Handshake:
    ready: bool
    am: str = ""
    error: Optional[AmFailure] = None

    @classmethod
    def from_record(cls, record: Any) -> "Handshake":
        if not isinstance(record, dict) or not isinstance(record.get("ready"), bool):
            raise AmHostError(MALFORMED_FRAME, "handshake must be {\"ready\": ...}")
        if record["ready"]:
            return cls(True, str(record.get("am", "")))
        return cls(False, error=AmFailure.from_record(record.get("error", {})))


def encode_frame(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def decode_frame(line: str) -> Any:
    try:
        return json.loads(line)
    except json.JSONDecodeError as exc:
        raise AmHostError(MALFORMED_FRAME, f"not a JSON record: {exc.msg}", line.strip()[:200]) from exc


def encode_request(request: AssignRequest) -> str:
    return encode_frame(request.to_record())


def decode_request(line: str) -> AssignRequest:
    return AssignRequest.from_record(decode_frame(line))


def encode_response(response: AssignResponse) -> str:
    return encode_frame(response.to_record())


def decode_response(line: str) -> AssignResponse:
    return AssignResponse.from_record(decode_frame(line))


def decode_handshake(line: str) -> Handshake:
    return Handshake.from_record(decode_frame(line))


def group_list(group: GroupAssignment) -> List[str]:
    return [group] if isinstance(group, str) else list(group)


def merge_assignments(pairs) -> Dict[str, GroupAssignment]:
    """(component id, group id) pairs in call order -> protocol assignments"""
    grouped: Dict[str, List[str]] = {}
    for cid, group in pairs:
        groups = grouped.setdefault(cid, [])
        if group not in groups:
            groups.append(group)
    return {cid: groups[0] if len(groups) == 1 else groups for cid, groups in grouped.items()}
