# Scenarios package: case-study dynamics and the scenario registry
from scenarios.base import Parameter, Scenario, ScenarioError
from scenarios.dragon import DragonHunt
from scenarios.farm import SmartFarm

SCENARIOS = {
    DragonHunt.name: DragonHunt(),
    SmartFarm.name: SmartFarm(),
}


def get_scenario(name: str) -> Scenario:
    if name not in SCENARIOS:
        raise ScenarioError(f"unknown scenario '{name}' (known: {', '.join(sorted(SCENARIOS))})")
    return SCENARIOS[name]
