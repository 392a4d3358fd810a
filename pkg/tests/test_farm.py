import pytest

from scenarios.base import HORIZON, ScenarioError
from scenarios.farm import SmartFarm


@pytest.fixture
def farm():
    return SmartFarm()


def idle(state):
    return {"Idle": frozenset(state.drones)}


def test_initial_state(farm):
    state = farm.init(7)
    snapshot = farm.snapshot(state)
    assert [state.fields[f].position for f in ("f1", "f2", "f3", "f4")] == [0, 1, 2, 3]
    assert snapshot.components["d3"].attrs == {"position": 2, "target": "f3"}
    assert sorted(snapshot.ensembles) == ["Idle", "Protect:f1", "Protect:f2", "Protect:f3", "Protect:f4"]
    assert snapshot.beyond_control["flock"] == {"field": state.flock_field, "birds": 3}
    birds = {f: snapshot.components[f].attrs["birds"] for f in state.fields}
    assert birds[state.flock_field] == 3
    assert sum(birds.values()) == 3


def test_drones_fly_one_field_per_step(farm):
    state = farm.init(7)
    farm.apply(state, {"Protect:f4": frozenset({"d1"})})
    assert (state.drones["d1"].position, state.drones["d1"].target) == (1, "f4")
    # without a new assignment the drone keeps its target
    farm.apply(state, {})
    assert state.drones["d1"].position == 2
    farm.apply(state, idle(state))
    assert (state.drones["d1"].position, state.drones["d1"].target) == (2, "")


def test_unprotected_birds_damage_the_crop(farm):
    state = farm.init(7)
    farm.apply(state, idle(state))
    assert farm.metrics(state)["total_damage"] == 3.0
    assert farm.metrics(state)["damage_rate"] == pytest.approx(3.0 / 400)


def test_drones_on_the_field_keep_birds_away(farm):
    state = farm.init(7, {"flock_size": 1})
    guard = "d" + state.flock_field[1:]
    farm.apply(state, {f"Protect:{state.flock_field}": frozenset({guard})})
    assert farm.metrics(state)["total_damage"] == 0


def test_damage_is_capped_by_the_area(farm):
    state = farm.init(7, {"field_area": 2})
    farm.apply(state, idle(state))
    farm.apply(state, idle(state))
    assert farm.metrics(state)["total_damage"] == 2


def test_flock_moves_after_its_dwell_time(farm):
    state = farm.init(3, {"min_dwell": 2, "max_dwell": 2})
    first = state.flock_field
    farm.apply(state, {})
    assert state.flock_field == first
    events = farm.apply(state, {})
    assert state.flock_field != first
    assert events[-1] == f"flock moved to {state.flock_field}"
    assert farm.metrics(state)["flock_moves"] == 1


def test_runs_for_the_configured_steps(farm):
    state = farm.init(1, {"steps": 1})
    assert farm.outcome(state) is None
    farm.apply(state, {})
    assert farm.outcome(state) == HORIZON


def test_same_seed_same_run(farm):
    def play(seed):
        state = farm.init(seed, {"min_dwell": 1, "max_dwell": 3})
        for _ in range(12):
            farm.apply(state, idle(state))
        return state.flock_field, farm.metrics(state)

    assert play(4) == play(4)


class TestRejectedInput:
    def test_unknown_field(self, farm):
        with pytest.raises(ScenarioError):
            farm.apply(farm.init(1), {"Protect:f9": frozenset({"d1"})})

    def test_unknown_drone(self, farm):
        with pytest.raises(ScenarioError):
            farm.apply(farm.init(1), {"Idle": frozenset({"d9"})})

    def test_dwell_range(self, farm):
        with pytest.raises(ScenarioError) as info:
            farm.init(1, {"min_dwell": 5, "max_dwell": 4})
        assert "min_dwell" in str(info.value)

    def test_needs_two_fields(self, farm):
        with pytest.raises(ScenarioError):
            farm.init(1, {"field_count": 1})
