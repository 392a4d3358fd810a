import os

import pytest

import config
from parsers.adsl import load_adsl
from parsers.fcdsl import load_constraints


def corpus(directory: str, name: str) -> str:
    return os.path.join(directory, name)


@pytest.fixture(scope="session")
def dragon_spec():
    return load_adsl(corpus(config.SPECS_DIR, "dragon.adsl"))


@pytest.fixture(scope="session")
def farm_spec():
    return load_adsl(corpus(config.SPECS_DIR, "farm.adsl"))


@pytest.fixture(scope="session")
def dragon_constraints():
    return load_constraints(corpus(config.CONSTRAINTS_DIR, "dragon.fcl"))


@pytest.fixture(scope="session")
def farm_constraints():
    return load_constraints(corpus(config.CONSTRAINTS_DIR, "farm.fcl"))


@pytest.fixture(scope="session")
def cadence_constraints():
    return load_constraints(corpus(config.CONSTRAINTS_DIR, "dragon_spawn_cadence.fcl"))


@pytest.fixture(scope="session")
def dragon_domain():
    with open(corpus(config.DOMAINS_DIR, "dragon.txt"), encoding="utf-8") as handle:
        return handle.read()


@pytest.fixture(scope="session")
def farm_domain():
    with open(corpus(config.DOMAINS_DIR, "farm.txt"), encoding="utf-8") as handle:
        return handle.read()
