"""
The adaptation loop of a verification run.

Each step the AM sees the current snapshot: for every periodic assignment it
receives the components passing the assignment's filter, the beyond-control
components and the valid group ids. The proposed update is checked against
the generic rules; a valid update is applied by the scenario and the new
snapshot is fed to the trace verifier (online monitor, with the offline oracle
for constraints outside the online subset). A generic violation stops the run.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from amhost.endpoint import AmEndpoint
from amhost.errors import AmHostError
from amhost.protocol import AssignRequest, ComponentRecord
from fcl import ast as A
from fcl.evaluator import Evaluator
from fcl.monitor import TraceVerifier
from fcl.trace import Snapshot
from fcl.violations import Note, Violation, sort_violations
from parsers.adsl import ArchitectureSpec, Assignment, InitialState
from runtime.generic_rules import check_disjoint, check_response, group_members, host_failure
from runtime.report import RunSummary, ViolationReport
from scenarios.base import Scenario
from scenarios.baselines import natural_key

logger = logging.getLogger(__name__)

GENERIC_STOP = "generic-violation"

EndpointFactory = Callable[[], AmEndpoint]


@dataclass
class RunResult:
    initial_state: str
    seed: int
    trace: List[Snapshot] = field(default_factory=list)
    violations: List[Violation] = field(default_factory=list)
    notes: List[Note] = field(default_factory=list)
    metrics: Dict[str, float] = field(default_factory=dict)
    stop_reason: str = ""
    events: List[List[str]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def steps(self) -> int:
        return len(self.trace) - 1

    def summary(self) -> RunSummary:
        return RunSummary(self.initial_state, self.seed, self.stop_reason, self.steps, dict(self.metrics))

    def report(self) -> ViolationReport:
        return ViolationReport(list(self.violations), list(self.notes), [self.summary()])


class AdaptationLoop:
    """Runs one AM against one scenario, verifying the constraints online"""

    def __init__(self, spec: ArchitectureSpec, scenario: Scenario,
                 constraints: Sequence[A.Constraint], endpoint: AmEndpoint):
        self.spec = spec
        self.scenario = scenario
        self.constraints = list(constraints)
        self.endpoint = endpoint
        self._filters = Evaluator()

    # --- views ---

    def components_for(self, assignment: Assignment, snapshot: Snapshot) -> List[str]:
        """Components of the assignment's type that pass its filter, in id order"""
        candidates = sorted(snapshot.of_type(assignment.component_type), key=natural_key)
        if assignment.filter is None:
            return candidates
        return [
            cid for cid in candidates
            if self._filters.formula(assignment.filter, snapshot, {"self": A.ComponentRef(cid)})
        ]

    def group_map(self, assignment: Assignment, snapshot: Snapshot) -> Dict[str, str]:
        """group id -> ensemble instance id, in declaration order"""
        groups: Dict[str, str] = {}
        for ensemble_id in assignment.ensembles:
            ensemble = self.spec.ensemble(ensemble_id)
            if ensemble.per is None:
                groups[ensemble.group_id()] = ensemble.id
                continue
            for owner in sorted(snapshot.of_type(ensemble.per), key=natural_key):
                groups[ensemble.group_id(owner)] = ensemble.instance_id(owner)
        return groups

    def request(self, assignment: Assignment, snapshot: Snapshot, step: int,
                component_ids: Sequence[str], group_ids: Sequence[str]) -> AssignRequest:
        return AssignRequest(
            method=assignment.method,
            step=step,
            components=tuple(
                ComponentRecord(cid, dict(snapshot.components[cid].attrs)) for cid in component_ids
            ),
            beyond_control={name: dict(attrs) for name, attrs in snapshot.beyond_control.items()},
            group_ids=tuple(group_ids),
        )

    # --- one step ---

    def resolve(self, snapshot: Snapshot, step: int) -> Tuple[Dict[str, frozenset], List[Violation]]:
        """Ask the AM for the update of `step`; returns (update, generic violations)"""
        members: Dict[str, set] = {}
        handled_by: Dict[str, List[str]] = {}
        violations: List[Violation] = []
        for assignment in self.spec.assignments:
            component_ids = self.components_for(assignment, snapshot)
            if not component_ids:
                continue
            groups = self.group_map(assignment, snapshot)
            request = self.request(assignment, snapshot, step, component_ids, list(groups))
            try:
                response = self.endpoint.invoke(request)
            except AmHostError as exc:
                logger.info("AM failed in %s at step %d: %s", assignment.method, step, exc)
                return {}, [host_failure(exc, step, assignment.method)]
            checked = check_response(request, response)
            violations.extend(checked.violations)
            for cid in component_ids:
                handled_by.setdefault(cid, []).append(assignment.method)
            for instance, cids in group_members(checked.groups, groups).items():
                members.setdefault(instance, set()).update(cids)
        violations.extend(check_disjoint(step, handled_by))
        return {eid: frozenset(cids) for eid, cids in members.items()}, violations

    # --- a run ---

    def run(self, initial_state: InitialState) -> RunResult:
        result = RunResult(initial_state.name, initial_state.seed)
        state = self.scenario.init(initial_state.seed, initial_state.parameters)
        monitor = TraceVerifier(self.constraints)
        snapshot = self.scenario.snapshot(state)
        result.trace.append(snapshot)
        monitor.step(snapshot)
        logger.info('run "%s" (seed %d) with %s', initial_state.name, initial_state.seed, self.endpoint.name)

        generic: List[Violation] = []
        try:
            self.endpoint.start()
        except AmHostError as exc:
            generic.append(host_failure(exc, 0))
            result.stop_reason = GENERIC_STOP

        horizon = self.scenario.horizon(state)
        step = 0
        try:
            while not result.stop_reason and step < horizon:
                step += 1
                update, generic = self.resolve(snapshot, step)
                if generic:
                    result.stop_reason = GENERIC_STOP
                    break
                result.events.append(self.scenario.apply(state, update))
                snapshot = self.scenario.snapshot(state)
                result.trace.append(snapshot)
                monitor.step(snapshot)
                result.stop_reason = self.scenario.outcome(state) or ""
        finally:
            self.endpoint.close()

        monitor.finish()
        violations = sort_violations(monitor.violations + generic)
        result.violations = [v.with_state(initial_state.name) for v in violations]
        result.notes = monitor.notes
        result.metrics = self.scenario.metrics(state)
        result.stop_reason = result.stop_reason or "horizon"
        logger.info('run "%s" stopped (%s) after %d steps with %d violations',
                    initial_state.name, result.stop_reason, result.steps, len(result.violations))
        return result


def run_batch(spec: ArchitectureSpec, scenario: Scenario, constraints: Sequence[A.Constraint],
              endpoint_factory: EndpointFactory,
              initial_states: Optional[Sequence[InitialState]] = None,
              jobs: int = 1) -> Tuple[ViolationReport, List[RunResult]]:
    """One run per initial state, each with a fresh endpoint; results keep the state order"""
    states = list(initial_states if initial_states is not None else spec.initial_states)
    if not states:
        raise ValueError("verification needs at least one initial state")

    def run_one(initial_state: InitialState) -> RunResult:
        return AdaptationLoop(spec, scenario, constraints, endpoint_factory()).run(initial_state)

    if jobs > 1 and len(states) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, states))
    else:
        results = [run_one(s) for s in states]

    report = ViolationReport()
    for result in results:
        report.extend(result.report())
    return report, results
