"""
Smart Farm.

Fields lie on a line at positions 0..F-1. Drones fly at most one position per
step towards their target field and protect it once they are on it. A single
flock of birds stays on a field for a random dwell time, then moves to another
field. Unprotected birds damage the crop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from fcl.trace import ComponentState, Snapshot
from scenarios.base import HORIZON, Parameter, Scenario, ScenarioError, Update

logger = logging.getLogger(__name__)

PROTECT = "Protect"
IDLE = "Idle"


@dataclass
class Field:
    id: str
    position: int
    area: float
    damage: float = 0.0


@dataclass
class Drone:
    id: str
    position: int
    target: str


@dataclass
class SmartFarmState:
    rng: np.random.Generator
    parameters: Dict[str, float]
    fields: Dict[str, Field] = field(default_factory=dict)
    drones: Dict[str, Drone] = field(default_factory=dict)
    flock_field: str = ""
    dwell_left: int = 0
    flock_moves: int = 0
    step: int = 0
    ensembles: Dict[str, frozenset] = field(default_factory=dict)

    def birds_on(self, field_id: str) -> int:
        return int(self.parameters["flock_size"]) if field_id == self.flock_field else 0


class SmartFarm(Scenario):
    name = "farm"
    description = "Smart Farm: drones protect crop fields from a moving flock of birds"
    parameters = (
        Parameter("field_count", 4, 2, 100, description="number of fields"),
        Parameter("drone_count", 4, 0, 100, description="number of drones"),
        Parameter("flock_size", 3, 1, 100, description="birds in the flock"),
        Parameter("min_dwell", 6, 1, 1000, description="fewest steps the flock stays on a field"),
        Parameter("max_dwell", 10, 1, 1000, description="most steps the flock stays on a field"),
        Parameter("field_area", 100, 1, 100000, integer=False, description="crop area of each field"),
        Parameter("damage_unit", 1.0, 0.0, 1000, integer=False,
                  description="damage per unprotected bird and step"),
        Parameter("steps", 30, 1, 1000, description="adaptation steps of a run"),
    )

    def check_parameters(self, parameters: Dict[str, float]) -> None:
        if parameters["min_dwell"] > parameters["max_dwell"]:
            raise ScenarioError("min_dwell must not exceed max_dwell")

    # --- state ---

    def init(self, seed: int, parameters: Optional[Mapping] = None) -> SmartFarmState:
        resolved = self.resolve_parameters(parameters)
        state = SmartFarmState(rng=np.random.default_rng(seed), parameters=resolved)
        count = resolved["field_count"]
        for index in range(count):
            fid = f"f{index + 1}"
            state.fields[fid] = Field(fid, index, float(resolved["field_area"]))
        field_ids = list(state.fields)
        for index in range(resolved["drone_count"]):
            home = field_ids[index % count]
            state.drones[f"d{index + 1}"] = Drone(f"d{index + 1}", state.fields[home].position, home)
        state.flock_field = field_ids[int(state.rng.integers(count))]
        state.dwell_left = self._dwell(state)
        state.ensembles = self._empty_ensembles(state)
        return state

    def _dwell(self, state: SmartFarmState) -> int:
        low, high = state.parameters["min_dwell"], state.parameters["max_dwell"]
        return int(state.rng.integers(low, high + 1))

    @staticmethod
    def _empty_ensembles(state: SmartFarmState) -> Dict[str, frozenset]:
        ensembles = {f"{PROTECT}:{fid}": frozenset() for fid in state.fields}
        ensembles[IDLE] = frozenset()
        return ensembles

    def snapshot(self, state: SmartFarmState) -> Snapshot:
        components = {
            d.id: ComponentState("Drone", {"position": d.position, "target": d.target})
            for d in state.drones.values()
        }
        for f in state.fields.values():
            components[f.id] = ComponentState("Field", {
                "position": f.position,
                "area": f.area,
                "damage": round(f.damage, 6),
                "birds": state.birds_on(f.id),
            })
        return Snapshot(
            step=state.step,
            components=components,
            ensembles=dict(state.ensembles),
            beyond_control={"flock": {"field": state.flock_field,
                                      "birds": int(state.parameters["flock_size"])}},
        )

    # --- dynamics ---

    def apply(self, state: SmartFarmState, update: Update) -> List[str]:
        ensembles = self._empty_ensembles(state)
        for eid in update:
            if eid not in ensembles:
                raise ScenarioError(f"unknown ensemble in update: {eid}")
            missing = self.members(update, eid) - set(state.drones)
            if missing:
                raise ScenarioError(f"update assigns unknown drones {sorted(missing)} to {eid}")
            ensembles[eid] = self.members(update, eid)

        state.step += 1
        events: List[str] = []

        for eid, members in ensembles.items():
            for did in members:
                state.drones[did].target = eid.split(":", 1)[1] if eid != IDLE else ""
        for drone in state.drones.values():
            if drone.target:
                goal = state.fields[drone.target].position
                drone.position += (goal > drone.position) - (goal < drone.position)

        flock = state.fields[state.flock_field]
        guards = sum(
            1 for did in ensembles[f"{PROTECT}:{flock.id}"]
            if state.drones[did].position == flock.position
        )
        birds = state.birds_on(flock.id)
        damage = min(max(0, birds - guards) * state.parameters["damage_unit"], flock.area - flock.damage)
        if damage > 0:
            flock.damage += damage
            events.append(f"birds damaged {flock.id} by {damage:g}")

        state.dwell_left -= 1
        if state.dwell_left <= 0:
            others = [fid for fid in state.fields if fid != state.flock_field]
            state.flock_field = others[int(state.rng.integers(len(others)))]
            state.dwell_left = self._dwell(state)
            state.flock_moves += 1
            events.append(f"flock moved to {state.flock_field}")

        state.ensembles = ensembles
        logger.debug("farm step %d: %s", state.step, "; ".join(events) or "quiet")
        return events

    def outcome(self, state: SmartFarmState) -> Optional[str]:
        return HORIZON if state.step >= self.horizon(state) else None

    def horizon(self, state: SmartFarmState) -> int:
        return int(state.parameters["steps"])

    def metrics(self, state: SmartFarmState) -> Dict[str, float]:
        total_damage = sum(f.damage for f in state.fields.values())
        total_area = sum(f.area for f in state.fields.values())
        return {
            "damage_rate": total_damage / total_area if total_area else 0.0,
            "total_damage": total_damage,
            "flock_moves": state.flock_moves,
            "steps": state.step,
        }
