"""
Hand-written adaptation managers.

They implement the same interface as generated ones: one method per
assignment, called with read-only component views, the environment and the
valid group ids. Assignments are made through environment.assign_group().
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional

from scenarios.dragon import FARMER, ROLES, WARRIOR

SPAWN_GROUP = {WARRIOR: "spawn warrior", FARMER: "spawn farmer"}


def natural_key(text: str):
    """'d10' sorts after 'd9'"""
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", text)]


# ══════════════════════════════════════════════════════════════
# Dragon Hunt
# ══════════════════════════════════════════════════════════════

class DragonHuntBaseline:
    """
    Warriors go to the Cave and attack. Farmers stay in the Village: pairs of
    farmers spawn villagers alternating warrior and farmer until three of each
    were spawned, the rest farm.
    """

    SPAWN_QUOTA = 3

    def __init__(self):
        self.spawned = {WARRIOR: 0, FARMER: 0}

    def _next_kind(self, farmers: int) -> str:
        if min(self.spawned.values()) < self.SPAWN_QUOTA:
            return WARRIOR if self.spawned[WARRIOR] <= self.spawned[FARMER] else FARMER
        return WARRIOR if farmers >= 4 else FARMER

    def plan_spawns(self, farmers: int, wheat: int) -> List[str]:
        if farmers < 2:
            return []
        both = ROLES[WARRIOR]["cost"] + ROLES[FARMER]["cost"]
        if farmers >= 4 and wheat >= both:
            plan = [WARRIOR, FARMER]
        else:
            kind = self._next_kind(farmers)
            plan = [kind] if wheat >= ROLES[kind]["cost"] else []
        for kind in plan:
            self.spawned[kind] += 1
        return plan

    def village_groups(self, components, environment) -> Dict[str, str]:
        groups = {}
        farmers = sorted((c for c in components if c.role == FARMER), key=lambda c: natural_key(c.id))
        for component in components:
            if component.role == WARRIOR:
                groups[component.id] = "cave"
        plan = self.plan_spawns(len(farmers), environment.farm.wheat)
        for index, farmer in enumerate(farmers):
            pair = index // 2
            groups[farmer.id] = SPAWN_GROUP[plan[pair]] if pair < len(plan) else "farm"
        return groups

    def assign_in_village(self, components, environment, group_ids, step):
        groups = self.village_groups(components, environment)
        for component in components:
            environment.assign_group(component, groups[component.id])

    def assign_in_cave(self, components, environment, group_ids, step):
        for component in components:
            environment.assign_group(component, "attack")


class DragonHuntIdle:
    """Everybody stays where they are"""

    def assign_in_village(self, components, environment, group_ids, step):
        for component in components:
            environment.assign_group(component, "farm")

    def assign_in_cave(self, components, environment, group_ids, step):
        for component in components:
            environment.assign_group(component, "cave")


class DragonHuntDoubleAssign(DragonHuntBaseline):
    """Puts the first villager in the Village into two groups"""

    def assign_in_village(self, components, environment, group_ids, step):
        super().assign_in_village(components, environment, group_ids, step)
        if components:
            first = min(components, key=lambda c: natural_key(c.id))
            other = "cave" if environment.assignments.get(first.id) != "cave" else "farm"
            environment.assign_group(first, other)


class DragonHuntWrongGroup(DragonHuntBaseline):
    """Sends villagers in the Cave to a group of the Village"""

    def assign_in_cave(self, components, environment, group_ids, step):
        for component in components:
            environment.assign_group(component, "farm")


# ══════════════════════════════════════════════════════════════
# Smart Farm
# ══════════════════════════════════════════════════════════════

def _field_ids(group_ids) -> List[str]:
    fields = [g.split(" ", 1)[1] for g in group_ids if g.startswith("protect ")]
    return sorted(fields, key=natural_key)


class SmartFarmCoordinating:
    """
    As many drones as there are birds guard the flock's field; the remaining
    drones patrol all fields in turn, moving on once they reach a field.
    """

    def __init__(self):
        self.patrol: Dict[str, int] = {}
        self.last_position: Dict[str, int] = {}

    def _patrol_target(self, drone, fields: List[str]) -> str:
        if drone.id not in self.patrol:
            self.patrol[drone.id] = fields.index(drone.target) if drone.target in fields else 0
        else:
            current = fields[self.patrol[drone.id] % len(fields)]
            arrived = drone.target == current and self.last_position.get(drone.id) == drone.position
            if arrived:
                self.patrol[drone.id] += 1
        self.last_position[drone.id] = drone.position
        return fields[self.patrol[drone.id] % len(fields)]

    def assign_drones(self, components, environment, group_ids, step):
        fields = _field_ids(group_ids)
        drones = sorted(components, key=lambda c: natural_key(c.id))
        guards = environment.flock.birds
        for index, drone in enumerate(drones):
            if index < guards:
                environment.assign_group(drone, f"protect {environment.flock.field}")
            else:
                environment.assign_group(drone, f"protect {self._patrol_target(drone, fields)}")


class SmartFarmStatic:
    """Drone i guards field i (modulo the number of fields)"""

    def assign_drones(self, components, environment, group_ids, step):
        fields = _field_ids(group_ids)
        drones = sorted(components, key=lambda c: natural_key(c.id))
        for index, drone in enumerate(drones):
            environment.assign_group(drone, f"protect {fields[index % len(fields)]}")


class SmartFarmIdle:
    def assign_drones(self, components, environment, group_ids, step):
        for drone in components:
            environment.assign_group(drone, "idle")


BUILTIN_AMS = {
    "dragon": {
        "baseline": DragonHuntBaseline,
        "idle": DragonHuntIdle,
        "double-assign": DragonHuntDoubleAssign,
        "wrong-group": DragonHuntWrongGroup,
    },
    "farm": {
        "coordinating": SmartFarmCoordinating,
        "baseline": SmartFarmCoordinating,
        "static": SmartFarmStatic,
        "idle": SmartFarmIdle,
    },
}


def builtin_am(scenario: str, name: str) -> Optional[type]:
    return BUILTIN_AMS.get(scenario, {}).get(name)
