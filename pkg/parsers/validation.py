"""
Consistency checks between an architecture specification, its constraints and
the scenario that runs it.
"""

from __future__ import annotations

import logging
from typing import Iterable, List, Optional, Set

from fcl import ast as A
from parsers.adsl import ArchitectureSpec
from parsers.errors import DslValidationError

logger = logging.getLogger(__name__)


def spec_problems(spec: ArchitectureSpec) -> List[str]:
    problems: List[str] = []
    ensemble_ids = {e.id for e in spec.ensembles}
    component_names = {c.name for c in spec.components}

    for ensemble in spec.ensembles:
        if ensemble.per is not None and ensemble.per not in component_names:
            problems.append(f"ensemble '{ensemble.id}' is per undeclared component '{ensemble.per}'")
    group_ids = [e.name for e in spec.ensembles if e.per is None]
    for name in sorted(set(group_ids)):
        if group_ids.count(name) > 1:
            # the same group may appear in several assignments, but not twice in one
            owners = [e.id for e in spec.ensembles if e.name == name]
            for assignment in spec.assignments:
                shared = [o for o in owners if o in assignment.ensembles]
                if len(shared) > 1:
                    problems.append(
                        f"assignment '{assignment.method}' has two ensembles named '{name}': "
                        + ", ".join(shared)
                    )

    methods = [a.method for a in spec.assignments]
    for assignment in spec.assignments:
        if methods.count(assignment.method) > 1:
            problems.append(f"assignment method '{assignment.method}' declared twice")
        if assignment.component_type not in component_names:
            problems.append(
                f"assignment '{assignment.method}' assigns undeclared component '{assignment.component_type}'"
            )
        for ensemble_id in assignment.ensembles:
            if ensemble_id not in ensemble_ids:
                problems.append(
                    f"assignment '{assignment.method}' names undeclared ensemble '{ensemble_id}'"
                )
        component = spec.component(assignment.component_type)
        if assignment.filter is not None and component is not None:
            for node in A.walk(assignment.filter):
                if isinstance(node, A.Attr) and node.target.name == "self" \
                        and node.name != "id" and component.attribute(node.name) is None:
                    problems.append(
                        f"filter of '{assignment.method}' uses unknown attribute '{node.name}' "
                        f"of '{component.name}'"
                    )

    for beyond in spec.beyond_control:
        if beyond.type not in component_names:
            problems.append(f"beyond-control '{beyond.accessor}' has undeclared type '{beyond.type}'")

    if spec.am_interface is None:
        problems.append("missing am_interface")
    return sorted(set(problems), key=problems.index)


def validate_spec(spec: ArchitectureSpec) -> ArchitectureSpec:
    problems = spec_problems(spec)
    if problems:
        raise DslValidationError(problems)
    return spec


def _known_sets(spec: ArchitectureSpec) -> Set[str]:
    names = {e.id for e in spec.ensembles}
    names |= {c.plural for c in spec.components}
    return names


def constraint_problems(spec: ArchitectureSpec, constraints: Iterable[A.Constraint]) -> List[str]:
    """Set names and attributes used by constraints must exist in the spec"""
    problems: List[str] = []
    known = _known_sets(spec)
    attributes = {a.id for c in spec.components for a in c.attributes} | {"id"}
    accessors = {b.accessor: spec.component(b.type) for b in spec.beyond_control}

    for constraint in constraints:
        label = f'constraint "{constraint.description}"'
        available = set(known)
        roots = [let.source for let in constraint.lets] + [constraint.body]
        for let in constraint.lets:
            for name in sorted(A.set_names(let.source) - available):
                problems.append(f"{label}: unknown set '{name}'")
            available.add(let.name)
        for name in sorted(A.set_names(constraint.body) - available):
            problems.append(f"{label}: unknown set '{name}'")

        for root in roots:
            bound = {n.var for n in A.walk(root) if isinstance(n, (A.ForAll, A.Exists, A.Comprehension))}
            for node in A.walk(root):
                if not isinstance(node, A.Attr):
                    continue
                owner = node.target.name
                if owner in bound:
                    if node.name not in attributes:
                        problems.append(f"{label}: unknown attribute '{node.name}'")
                elif owner in accessors:
                    component = accessors[owner]
                    if component is not None and component.attribute(node.name) is None:
                        problems.append(f"{label}: '{owner}' has no attribute '{node.name}'")
                else:
                    problems.append(f"{label}: '{owner}' is not a beyond-control component")
    return problems


def cross_validate(spec: ArchitectureSpec, constraints: Iterable[A.Constraint] = (),
                   scenario: Optional[str] = None) -> ArchitectureSpec:
    """
    Validate the spec, its constraints and its initial states together.
    Initial-state parameters are checked against the scenario's parameter registry.
    """
    from scenarios import get_scenario
    from scenarios.base import ScenarioError

    problems = spec_problems(spec) + constraint_problems(spec, constraints)
    scenario = scenario or spec.scenario
    if spec.initial_states:
        try:
            runner = get_scenario(scenario)
        except ScenarioError as exc:
            problems.append(str(exc))
        else:
            for state in spec.initial_states:
                try:
                    runner.resolve_parameters(state.parameters)
                except ScenarioError as exc:
                    problems.append(f'initial state "{state.name}": {exc}')
    if problems:
        logger.info("validation found %d problems", len(problems))
        raise DslValidationError(problems)
    return spec
