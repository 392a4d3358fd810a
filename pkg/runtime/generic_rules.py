"""
Generic constraints: domain-independent validity rules for AM responses.
Rule ids are stable; they appear in reports and in the feedback text.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Set

from amhost.errors import STARTUP_FAILURE, AmHostError
from amhost.protocol import AssignRequest, AssignResponse, group_list
from fcl.violations import GENERIC, Violation

logger = logging.getLogger(__name__)

CODE_VALIDITY = "code-validity"
RUNTIME_EXCEPTION = "runtime-exception"
APPROPRIATE_ENSEMBLES = "appropriate-ensembles"
EXACTLY_ONE_ENSEMBLE = "exactly-one-ensemble"

RULES = {
    CODE_VALIDITY: "The response must contain code that can be imported: the adaptation manager "
                   "class must be named as requested and derived from the given base class",
    RUNTIME_EXCEPTION: "The adaptation manager must not throw exceptions",
    APPROPRIATE_ENSEMBLES: "Components may only be assigned to the groups listed for the method "
                           "that received them",
    EXACTLY_ONE_ENSEMBLE: "Each component must be assigned to exactly one group",
}


def rule_description(rule: str) -> str:
    return RULES[rule]


def generic_violation(rule: str, step: int, detail: str, component: str = "") -> Violation:
    return Violation(
        constraint=rule_description(rule),
        kind=GENERIC,
        step=step,
        detail=detail,
        anchor=step,
        binding=(("component", component),) if component else (),
        rule=rule,
    )


def host_failure(error: AmHostError, step: int, method: str = "") -> Violation:
    """Transport and startup failures of an AM endpoint"""
    rule = CODE_VALIDITY if error.code == STARTUP_FAILURE else RUNTIME_EXCEPTION
    where = f" in {method}" if method else ""
    detail = f"{error.code}{where}: {error.message}"
    if error.detail:
        detail += "\n" + error.detail.rstrip()
    return generic_violation(rule, step, detail)


@dataclass
class CheckedAssignment:
    """Outcome of checking one response: group id per component, or violations"""
    groups: Dict[str, str] = field(default_factory=dict)
    violations: List[Violation] = field(default_factory=list)


def check_response(request: AssignRequest, response: AssignResponse) -> CheckedAssignment:
    step, method = request.step, request.method
    result = CheckedAssignment()
    if not response.ok:
        detail = f"{method} raised {response.error.message}"
        if response.error.traceback:
            detail += "\n" + response.error.traceback.rstrip()
        result.violations.append(generic_violation(RUNTIME_EXCEPTION, step, detail))
        return result

    requested = request.component_ids
    valid_groups = set(request.group_ids)
    for cid in sorted(response.assignments):
        groups = group_list(response.assignments[cid])
        if cid not in requested:
            result.violations.append(generic_violation(
                APPROPRIATE_ENSEMBLES, step,
                f"{method} assigned '{cid}', which is not one of its components", cid,
            ))
            continue
        wrong = [g for g in groups if g not in valid_groups]
        if wrong:
            result.violations.append(generic_violation(
                APPROPRIATE_ENSEMBLES, step,
                f"{method} assigned '{cid}' to {', '.join(repr(g) for g in wrong)}; "
                f"valid groups are {', '.join(repr(g) for g in request.group_ids)}", cid,
            ))
        if len(groups) > 1:
            result.violations.append(generic_violation(
                EXACTLY_ONE_ENSEMBLE, step,
                f"{method} assigned '{cid}' to {len(groups)} groups: {', '.join(repr(g) for g in groups)}", cid,
            ))
        if not wrong and len(groups) == 1:
            result.groups[cid] = groups[0]

    for cid in requested:
        if cid not in response.assignments:
            result.violations.append(generic_violation(
                EXACTLY_ONE_ENSEMBLE, step, f"{method} did not assign '{cid}' to any group", cid,
            ))
    if result.violations:
        logger.debug("step %d: %s broke %d generic rules", step, method, len(result.violations))
    return result


def check_disjoint(step: int, assigned: Mapping[str, Sequence[str]]) -> List[Violation]:
    """A component handled by several assignment methods in one step"""
    violations = []
    for cid in sorted(assigned):
        methods = assigned[cid]
        if len(methods) > 1:
            violations.append(generic_violation(
                EXACTLY_ONE_ENSEMBLE, step,
                f"'{cid}' was assigned by {', '.join(methods)}", cid,
            ))
    return violations


def group_members(groups: Mapping[str, str], group_map: Mapping[str, str]) -> Dict[str, Set[str]]:
    """component -> group id  to  ensemble instance id -> components"""
    members: Dict[str, Set[str]] = defaultdict(set)
    for cid, group in groups.items():
        members[group_map[group]].add(cid)
    return dict(members)
