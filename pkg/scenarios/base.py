"""
Scenario interface: seeded, deterministic system dynamics driven by
architecture updates, plus the parameter registry used for validation.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from fcl.trace import Snapshot

Number = Union[int, float]

# ensemble id (or instance id such as "Protect:f1") -> component ids
Update = Mapping[str, FrozenSet[str]]

WIN = "win"
LOSE = "lose"
HORIZON = "horizon"


class ScenarioError(Exception):
    """Invalid scenario name, parameter or update"""


@dataclass(frozen=True)
class Parameter:
    name: str
    default: Number
    minimum: Optional[Number] = None
    maximum: Optional[Number] = None
    integer: bool = True
    description: str = ""

    def coerce(self, value: Any) -> Number:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"parameter '{self.name}' must be a number")
        if self.integer:
            if float(value) != int(value):
                raise ScenarioError(f"parameter '{self.name}' must be an integer, got {value}")
            value = int(value)
        else:
            value = float(value)
        if self.minimum is not None and value < self.minimum:
            raise ScenarioError(f"parameter '{self.name}' must be at least {self.minimum}, got {value}")
        if self.maximum is not None and value > self.maximum:
            raise ScenarioError(f"parameter '{self.name}' must be at most {self.maximum}, got {value}")
        return value

    def describe(self) -> str:
        bounds = []
        if self.minimum is not None:
            bounds.append(f">= {self.minimum}")
        if self.maximum is not None:
            bounds.append(f"<= {self.maximum}")
        suffix = f" ({', '.join(bounds)})" if bounds else ""
        return f"{self.name} = {self.default}{suffix}: {self.description}"


class Scenario(abc.ABC):
    """A case study; state objects are confined to a single run"""

    name: str = ""
    description: str = ""
    parameters: Tuple[Parameter, ...] = ()

    def parameter(self, name: str) -> Optional[Parameter]:
        return next((p for p in self.parameters if p.name == name), None)

    def resolve_parameters(self, values: Optional[Mapping[str, Any]] = None) -> Dict[str, Number]:
        """Defaults overlaid with the given values; unknown names are rejected"""
        values = dict(values or {})
        unknown = sorted(set(values) - {p.name for p in self.parameters})
        if unknown:
            raise ScenarioError(
                f"unknown parameter '{unknown[0]}' for scenario '{self.name}'"
                f" (known: {', '.join(p.name for p in self.parameters)})"
            )
        resolved = {}
        for parameter in self.parameters:
            value = values.get(parameter.name, parameter.default)
            resolved[parameter.name] = parameter.coerce(value)
        self.check_parameters(resolved)
        return resolved

    def check_parameters(self, parameters: Dict[str, Number]) -> None:
        """Hook for cross-parameter checks"""

    @abc.abstractmethod
    def init(self, seed: int, parameters: Optional[Mapping[str, Any]] = None):
        """Create the state of a new run"""

    @abc.abstractmethod
    def snapshot(self, state) -> Snapshot:
        pass

    @abc.abstractmethod
    def apply(self, state, update: Update) -> List[str]:
        """Advance one adaptation step; returns human-readable events"""

    @abc.abstractmethod
    def outcome(self, state) -> Optional[str]:
        """WIN / LOSE once the run is decided, else None"""

    @abc.abstractmethod
    def metrics(self, state) -> Dict[str, Number]:
        pass

    @abc.abstractmethod
    def horizon(self, state) -> int:
        """Maximum number of adaptation steps"""

    @staticmethod
    def members(update: Update, ensemble_id: str) -> FrozenSet[str]:
        return frozenset(update.get(ensemble_id, ()))
