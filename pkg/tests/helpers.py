"""Builders shared by the test modules"""

import os
import sys

from fcl.trace import ComponentState, Snapshot

STUBS_DIR = os.path.join(os.path.dirname(__file__), "stubs")


def villager(role="Farmer", hp=4, location="Village") -> ComponentState:
    return ComponentState("Villager", {"role": role, "hp": hp, "location": location})


def snap(step, components=None, ensembles=None, beyond_control=None) -> Snapshot:
    return Snapshot(step, dict(components or {}), dict(ensembles or {}), dict(beyond_control or {}))


def flags(values, name="ok"):
    """A trace where component c1 has attribute `name` set to each value in turn"""
    return [
        snap(step, {"c1": ComponentState("Item", {name: value})})
        for step, value in enumerate(values)
    ]


def stub_command(name: str):
    return [sys.executable, os.path.join(STUBS_DIR, name)]
