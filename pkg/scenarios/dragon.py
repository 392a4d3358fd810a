"""
Dragon Hunt.

Villagers live in a Village next to a Cave with a Dragon. Each adaptation step
resolves, in order: farming, spawning, movement, the attack on the Dragon and
its counterattack. Killing the Dragon wins; surviving the horizon loses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from fcl.trace import ComponentState, Snapshot
from scenarios.base import LOSE, WIN, Parameter, Scenario, ScenarioError, Update

logger = logging.getLogger(__name__)

FARMER = "Farmer"
WARRIOR = "Warrior"
VILLAGE = "Village"
CAVE = "Cave"
DRAGON_ID = "D1"

# ensemble ids
FARM = "Farm"
GO_TO_CAVE = "GoToCave"
SPAWN_FARMER = "SpawnFarmer"
SPAWN_WARRIOR = "SpawnWarrior"
ATTACK = "Attack"
STAY_IN_CAVE = "StayInCave"
GO_TO_VILLAGE = "GoToVillage"
ENSEMBLES = (FARM, GO_TO_CAVE, SPAWN_FARMER, SPAWN_WARRIOR, ATTACK, STAY_IN_CAVE, GO_TO_VILLAGE)

ROLES = {
    FARMER: {"hp": 4, "wheat": 5, "damage": 1, "cost": 10},
    WARRIOR: {"hp": 6, "wheat": 2, "damage": 3, "cost": 12},
}
DRAGON_HP = 50


@dataclass
class Villager:
    id: str
    role: str
    hp: int
    location: str = VILLAGE


@dataclass
class DragonHuntState:
    rng: np.random.Generator
    parameters: Dict[str, float]
    villagers: Dict[str, Villager] = field(default_factory=dict)
    dragon_hp: int = DRAGON_HP
    wheat: int = 0
    step: int = 0
    next_id: int = 1
    ensembles: Dict[str, frozenset] = field(default_factory=dict)
    spawned: Dict[str, int] = field(default_factory=lambda: {FARMER: 0, WARRIOR: 0})
    deaths: int = 0


class DragonHunt(Scenario):
    name = "dragon"
    description = "Dragon Hunt: villagers farm, spawn and attack a dragon within a step limit"
    parameters = (
        Parameter("farmer_count", 2, 0, 50, description="farmers at the start"),
        Parameter("warrior_count", 1, 0, 50, description="warriors at the start"),
        Parameter("counterattack_probability", 0.4, 0.0, 1.0, integer=False,
                  description="chance that the attacked dragon strikes back"),
        Parameter("counterattack_damage", 2, 0, 100, description="HP lost by the struck villager"),
        Parameter("steps", 30, 1, 1000, description="adaptation steps before the game is lost"),
    )

    # --- state ---

    def init(self, seed: int, parameters: Optional[Mapping] = None) -> DragonHuntState:
        resolved = self.resolve_parameters(parameters)
        state = DragonHuntState(rng=np.random.default_rng(seed), parameters=resolved)
        for _ in range(resolved["farmer_count"]):
            self._spawn(state, FARMER)
        for _ in range(resolved["warrior_count"]):
            self._spawn(state, WARRIOR)
        state.spawned = {FARMER: 0, WARRIOR: 0}
        state.ensembles = {eid: frozenset() for eid in ENSEMBLES}
        return state

    def _spawn(self, state: DragonHuntState, role: str) -> Villager:
        villager = Villager(f"V{state.next_id:02d}", role, ROLES[role]["hp"])
        state.next_id += 1
        state.villagers[villager.id] = villager
        state.spawned[role] += 1
        return villager

    def snapshot(self, state: DragonHuntState) -> Snapshot:
        components = {
            v.id: ComponentState("Villager", {"role": v.role, "hp": v.hp, "location": v.location})
            for v in state.villagers.values()
        }
        components[DRAGON_ID] = ComponentState("Dragon", {"hp": state.dragon_hp})
        return Snapshot(
            step=state.step,
            components=components,
            ensembles=dict(state.ensembles),
            beyond_control={"dragon": {"hp": state.dragon_hp}, "farm": {"wheat": state.wheat}},
        )

    # --- dynamics ---

    def apply(self, state: DragonHuntState, update: Update) -> List[str]:
        unknown = set(update) - set(ENSEMBLES)
        if unknown:
            raise ScenarioError(f"unknown ensembles in update: {', '.join(sorted(unknown))}")
        for eid in ENSEMBLES:
            missing = self.members(update, eid) - set(state.villagers)
            if missing:
                raise ScenarioError(f"update assigns unknown villagers {sorted(missing)} to {eid}")

        state.step += 1
        events: List[str] = []
        villagers = state.villagers

        produced = sum(ROLES[villagers[cid].role]["wheat"] for cid in self.members(update, FARM))
        state.wheat += produced
        if produced:
            events.append(f"farm produced {produced} wheat")

        newcomers = []
        for ensemble, role in ((SPAWN_WARRIOR, WARRIOR), (SPAWN_FARMER, FARMER)):
            cost = ROLES[role]["cost"]
            for _ in range(len(self.members(update, ensemble)) // 2):
                if state.wheat < cost:
                    break
                state.wheat -= cost
                newcomers.append(role)

        for cid in self.members(update, GO_TO_CAVE):
            villagers[cid].location = CAVE
        for cid in self.members(update, GO_TO_VILLAGE):
            villagers[cid].location = VILLAGE

        attackers = sorted(self.members(update, ATTACK))
        damage = sum(ROLES[villagers[cid].role]["damage"] for cid in attackers)
        if attackers:
            state.dragon_hp -= damage
            events.append(f"{len(attackers)} villagers dealt {damage} damage, dragon hp {state.dragon_hp}")

        ensembles = {eid: self.members(update, eid) for eid in ENSEMBLES}
        if attackers and state.dragon_hp > 0:
            if state.rng.random() < state.parameters["counterattack_probability"]:
                victim = villagers[attackers[int(state.rng.integers(len(attackers)))]]
                victim.hp -= state.parameters["counterattack_damage"]
                events.append(f"dragon struck {victim.id}, hp {victim.hp}")
                if victim.hp <= 0:
                    del villagers[victim.id]
                    state.deaths += 1
                    ensembles = {eid: ids - {victim.id} for eid, ids in ensembles.items()}
                    events.append(f"{victim.id} died")

        for role in newcomers:
            villager = self._spawn(state, role)
            events.append(f"spawned {role} {villager.id}")

        state.ensembles = ensembles
        logger.debug("dragon step %d: %s", state.step, "; ".join(events) or "nothing happened")
        return events

    def outcome(self, state: DragonHuntState) -> Optional[str]:
        if state.dragon_hp <= 0:
            return WIN
        if state.step >= self.horizon(state):
            return LOSE
        return None

    def horizon(self, state: DragonHuntState) -> int:
        return int(state.parameters["steps"])

    def metrics(self, state: DragonHuntState) -> Dict[str, float]:
        won = state.dragon_hp <= 0
        return {
            "win": 1 if won else 0,
            "steps_to_win": state.step if won else None,
            "steps": state.step,
            "dragon_hp": state.dragon_hp,
            "villagers": len(state.villagers),
            "farmers_spawned": state.spawned[FARMER],
            "warriors_spawned": state.spawned[WARRIOR],
            "deaths": state.deaths,
        }
