import json

import pytest

from fcl.errors import TraceFormatError
from fcl.trace import (
    ComponentState,
    Snapshot,
    dumps_trace,
    loads_trace,
    read_trace,
    validate_trace,
    write_trace,
)
from tests.helpers import snap, villager


@pytest.fixture
def trace():
    return [
        snap(0, {"V01": villager(), "D1": ComponentState("Dragon", {"hp": 50})},
             {"Farm": frozenset({"V01"}), "Attack": frozenset()},
             {"dragon": {"hp": 50}, "farm": {"wheat": 0}}),
        snap(1, {"V01": villager(location="Cave"), "D1": ComponentState("Dragon", {"hp": 47})},
             {"Farm": frozenset(), "Attack": frozenset({"V01"})},
             {"dragon": {"hp": 47}, "farm": {"wheat": 1}}),
    ]


def test_one_snapshot_per_line(trace):
    text = dumps_trace(trace)
    lines = text.splitlines()
    assert len(lines) == 2
    assert json.loads(lines[1])["ensembles"]["Attack"] == ["V01"]
    assert loads_trace(text) == trace


def test_file_round_trip(tmp_path, trace):
    path = tmp_path / "run.jsonl"
    write_trace(str(path), trace)
    assert read_trace(str(path)) == trace


def test_blank_lines_are_ignored(trace):
    text = dumps_trace(trace).replace("\n", "\n\n")
    assert len(loads_trace(text)) == 2


def test_empty_trace():
    with pytest.raises(TraceFormatError):
        loads_trace("")
    with pytest.raises(TraceFormatError):
        validate_trace([])


def test_steps_must_count_from_zero(trace):
    with pytest.raises(TraceFormatError) as info:
        validate_trace(trace[1:])
    assert "expected step 0" in str(info.value)


def test_bad_json_reports_the_line(trace):
    text = dumps_trace(trace) + "{not json\n"
    with pytest.raises(TraceFormatError) as info:
        loads_trace(text)
    assert str(info.value).startswith("line 3:")


@pytest.mark.parametrize("record", [
    {"step": 0, "extra": 1},
    {"step": -1},
    {"step": "0"},
    {"components": {}},
    {"step": 0, "components": {"V01": {"type": "Villager", "hp": 4}}},
    {"step": 0, "components": {"V01": {"attrs": {}}}},
    {"step": 0, "components": []},
    {"step": 0, "components": {"V01": {"type": "Villager", "attrs": [1, 2]}}},
    {"step": 0, "ensembles": []},
    {"step": 0, "ensembles": {"Attack": "V01"}},
    {"step": 0, "ensembles": {"Attack": ["V01", 2]}},
    {"step": 0, "beyond_control": "dragon"},
    {"step": 0, "beyond_control": {"dragon": 40}},
])
def test_malformed_records(record):
    with pytest.raises(TraceFormatError):
        Snapshot.from_record(record)


def test_missing_sections_default_to_empty():
    snapshot = Snapshot.from_record({"step": 0})
    assert snapshot.components == {} and snapshot.ensembles == {} and snapshot.beyond_control == {}


def test_family_union():
    snapshot = snap(0, ensembles={"Protect:f1": frozenset({"d1"}), "Protect:f2": frozenset({"d2"}),
                                  "Idle": frozenset()})
    assert snapshot.ensemble_family("Protect") == (True, frozenset({"d1", "d2"}))
    assert snapshot.ensemble_family("Guard") == (False, frozenset())


def test_malformed_sections_are_named():
    with pytest.raises(TraceFormatError) as info:
        Snapshot.from_record({"step": 0, "ensembles": {"Attack": "V01"}})
    assert "ensemble 'Attack'" in str(info.value)
    with pytest.raises(TraceFormatError) as info:
        loads_trace('{"step": 0, "components": []}\n')
    assert "'components' must be an object" in str(info.value)
