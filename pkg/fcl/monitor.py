"""
Online constraint monitor.

Snapshots are fed one at a time. Forward windows become temporal obligations
that are settled as soon as their outcome is certain; backward windows read a
per-constraint history buffer. When the trace length is not known up front,
obligations whose bounds depend on MAX, and anchors that use MAX as a value,
are settled in finish().
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Mapping, Optional, Sequence

from fcl import ast as A
from fcl.bounds import resolve_window
from fcl.errors import FclLoadError, MonitorError, UnresolvedEndcountError
from fcl.evaluator import (
    AnchorKind,
    ConstraintShape,
    Evaluator,
    analyse,
    binding_env,
    binding_present,
    cancellation_note,
    eval_offline,
    obligation_violation,
    state_violation,
)
from fcl.obligations import ObligationStatus, TemporalObligation
from fcl.subset import online_problems, split_online, well_formedness_problems
from fcl.trace import Snapshot
from fcl.violations import Binding, Note, Violation, sort_violations

logger = logging.getLogger(__name__)


class _HistoryWithin:
    """Evaluates backward windows from recorded body values"""

    def __init__(self, values: Mapping[int, Sequence[bool]]):
        self.values = values

    def __call__(self, node: A.Within, snapshot: Snapshot, env: dict) -> bool:
        if node.is_forward:
            raise MonitorError("forward within outside an obligation position")
        window = resolve_window(node, snapshot.step, None)
        if window.vacuous:
            return True
        if window.impossible:
            return False
        span = len(window.steps(snapshot.step, snapshot.step + 1))
        recent = list(self.values[id(node)])[-span:] if span else []
        return sum(1 for value in recent if value) >= window.n


@dataclass
class _Plan:
    index: int
    constraint: A.Constraint
    shape: ConstraintShape
    evaluator: Evaluator
    backward: List[A.Within]
    history: Dict[int, Deque[bool]]
    seen: set = field(default_factory=set)


@dataclass
class _DeferredAnchor:
    plan: _Plan
    step: int
    binding: Binding
    snapshot: Snapshot
    history: Dict[int, tuple]
    obligations: List[TemporalObligation] = field(default_factory=list)


class Monitor:
    """Incremental verifier for constraints in the online-checkable subset"""

    def __init__(self, constraints: Sequence[A.Constraint], trace_length: Optional[int] = None,
                 indices: Optional[Sequence[int]] = None):
        problems = []
        for constraint in constraints:
            for problem in well_formedness_problems(constraint) + online_problems(constraint):
                problems.append(f'constraint "{constraint.description}": {problem}')
        if problems:
            raise FclLoadError(problems)

        self.trace_length = trace_length
        if indices is None:
            indices = range(len(constraints))
        elif len(indices) != len(constraints):
            raise ValueError("one index per constraint is needed")
        self._plans: List[_Plan] = [self._plan(i, c) for i, c in zip(indices, constraints)]
        self._by_index = {plan.index: plan for plan in self._plans}
        self._pending: List[TemporalObligation] = []
        self._deferred: List[_DeferredAnchor] = []
        self._violations: List[Violation] = []
        self._notes: List[Note] = []
        self._next_step = 0
        self._finished = False

    @classmethod
    def load(cls, constraints: Sequence[A.Constraint], trace_length: Optional[int] = None) -> "Monitor":
        return cls(constraints, trace_length)

    def _plan(self, index: int, constraint: A.Constraint) -> _Plan:
        backward = [n for n in A.walk(constraint.body) if isinstance(n, A.Within) and not n.is_forward]
        history = {}
        for node in backward:
            capacity = abs(node.t.value) if node.t.is_literal else None
            history[id(node)] = deque(maxlen=capacity)
        evaluator = Evaluator(constraint.let_map(), self.trace_length, _HistoryWithin(history))
        return _Plan(index, constraint, analyse(constraint), evaluator, backward, history)

    # --- public state ---

    @property
    def violations(self) -> List[Violation]:
        return sort_violations(self._violations)

    @property
    def notes(self) -> List[Note]:
        return list(self._notes)

    @property
    def pending(self) -> List[TemporalObligation]:
        return [ob for ob in self._pending if ob.status == ObligationStatus.PENDING]

    @property
    def current_step(self) -> int:
        return self._next_step - 1

    # --- stepping ---

    def step(self, snapshot: Snapshot) -> List[Violation]:
        """Feed the next snapshot; returns violations decided at this step"""
        if self._finished:
            raise MonitorError("monitor already finished")
        if snapshot.step != self._next_step:
            raise MonitorError(f"expected step {self._next_step}, got step {snapshot.step}")
        if self.trace_length is not None and snapshot.step >= self.trace_length:
            raise MonitorError(f"step {snapshot.step} is beyond the trace length {self.trace_length}")

        new: List[Violation] = []
        for obligation in self._pending:
            if obligation.observing:
                self._observe(obligation, snapshot)
            if not obligation.provisional:
                self._settle(obligation, self.trace_length, new)

        for plan in self._plans:
            self._anchor(plan, snapshot, new)

        for plan in self._plans:
            for node in plan.backward:
                plan.history[id(node)].append(plan.evaluator.formula(node.body, snapshot, {}))

        self._pending = [ob for ob in self._pending if ob.status == ObligationStatus.PENDING]
        self._next_step += 1
        logger.debug("step %d: %d pending obligations, %d new violations",
                     snapshot.step, len(self._pending), len(new))
        new = sort_violations(new)
        self._violations.extend(new)
        return new

    def finish(self) -> List[Violation]:
        """Resolve everything still pending; the trace ends at the last fed step"""
        if self._finished:
            return []
        if self._next_step == 0:
            raise MonitorError("finish() before any snapshot")
        length = self._next_step
        if self.trace_length is not None and length != self.trace_length:
            raise MonitorError(f"trace ended at length {length}, expected {self.trace_length}")
        self._finished = True

        new: List[Violation] = []
        dropped = set()
        for deferred in self._deferred:
            plan = deferred.plan
            evaluator = Evaluator(plan.constraint.let_map(), length, _HistoryWithin(deferred.history))
            env = binding_env(deferred.binding)
            if plan.shape.kind == AnchorKind.IMPLICATION:
                holds = evaluator.formula(plan.shape.antecedent, deferred.snapshot, env)
                for obligation in deferred.obligations:
                    if holds:
                        obligation.provisional = False
                    else:
                        dropped.add(id(obligation))
            elif not evaluator.formula(plan.shape.psi, deferred.snapshot, env):
                new.append(state_violation(plan.constraint, plan.index, deferred.step,
                                           deferred.binding, plan.shape.psi))
        self._deferred = []

        for obligation in self._pending:
            if id(obligation) in dropped:
                continue
            self._settle(obligation, length, new)
            if obligation.status == ObligationStatus.PENDING:
                raise MonitorError("obligation left pending at finish")
        self._pending = []

        new = sort_violations(new)
        self._violations.extend(new)
        return new

    # --- internals ---

    def _observe(self, obligation: TemporalObligation, snapshot: Snapshot) -> None:
        if not binding_present(obligation.binding, snapshot):
            logger.debug("obligation of constraint %d lost a component at step %d",
                         obligation.constraint_index, snapshot.step)
            obligation.observe(None)
            return
        plan = self._by_index[obligation.constraint_index]
        env = binding_env(obligation.binding)
        obligation.observe(plan.evaluator.formula(obligation.node.body, snapshot, env))

    def _settle(self, obligation: TemporalObligation, length: Optional[int], new: List[Violation]) -> None:
        resolution = obligation.resolve(length)
        if resolution is None:
            return
        plan = self._by_index[obligation.constraint_index]
        if resolution.status == ObligationStatus.VIOLATED:
            new.append(obligation_violation(
                plan.constraint, plan.index, obligation.anchor, obligation.binding,
                obligation.node, resolution, obligation.window,
            ))
        elif resolution.status == ObligationStatus.CANCELLED:
            logger.warning('obligation for "%s" cancelled at step %d',
                           plan.constraint.description, resolution.step)
            self._notes.append(cancellation_note(
                plan.constraint, plan.index, obligation.anchor, obligation.binding, resolution.step
            ))

    def _open(self, plan: _Plan, step: int, binding: Binding, node: A.Within,
              new: List[Violation], provisional: bool = False) -> TemporalObligation:
        obligation = TemporalObligation(plan.index, step, binding, node, provisional=provisional)
        if not provisional:
            self._settle(obligation, self.trace_length, new)
        if obligation.status == ObligationStatus.PENDING:
            self._pending.append(obligation)
        return obligation

    def _history_copy(self, plan: _Plan) -> Dict[int, tuple]:
        return {key: tuple(values) for key, values in plan.history.items()}

    def _anchor(self, plan: _Plan, snapshot: Snapshot, new: List[Violation]) -> None:
        shape = plan.shape
        evaluator = plan.evaluator
        step = snapshot.step
        for binding in evaluator.bindings(shape.prefix, snapshot):
            env = binding_env(binding)
            if shape.kind == AnchorKind.INITIAL:
                if binding in plan.seen:
                    continue
                plan.seen.add(binding)
                self._open(plan, step, binding, shape.obligation, new)
            elif shape.kind == AnchorKind.IMPLICATION:
                try:
                    holds = evaluator.formula(shape.antecedent, snapshot, env)
                except UnresolvedEndcountError:
                    deferred = _DeferredAnchor(plan, step, binding, snapshot, self._history_copy(plan))
                    for extra in evaluator.bindings(shape.consequent_prefix, snapshot, env):
                        deferred.obligations.append(
                            self._open(plan, step, binding + extra, shape.obligation, new, provisional=True)
                        )
                    self._deferred.append(deferred)
                    continue
                if not holds:
                    continue
                for extra in evaluator.bindings(shape.consequent_prefix, snapshot, env):
                    self._open(plan, step, binding + extra, shape.obligation, new)
            else:
                try:
                    holds = evaluator.formula(shape.psi, snapshot, env)
                except UnresolvedEndcountError:
                    self._deferred.append(
                        _DeferredAnchor(plan, step, binding, snapshot, self._history_copy(plan))
                    )
                    continue
                if not holds:
                    new.append(state_violation(plan.constraint, plan.index, step, binding, shape.psi))


def monitor_trace(constraints: Sequence[A.Constraint], trace: Sequence[Snapshot],
                  trace_length: Optional[int] = None) -> Monitor:
    """Replay a trace through a fresh monitor and finish it"""
    monitor = Monitor(constraints, trace_length)
    for snapshot in trace:
        monitor.step(snapshot)
    monitor.finish()
    return monitor


class TraceVerifier:
    """
    Verifies a trace as it grows. Constraints in the online-checkable subset go
    to a Monitor; the others are kept aside with the recorded snapshots and
    handed to the offline oracle in finish(). Violations keep the position of
    their constraint in the original sequence.
    """

    def __init__(self, constraints: Sequence[A.Constraint], trace_length: Optional[int] = None):
        online, self.offline = split_online(constraints)
        self.monitor = Monitor([c for _, c in online], trace_length, indices=[i for i, _ in online])
        self.trace: List[Snapshot] = []
        self._violations: List[Violation] = []
        self._notes: List[Note] = []
        self._finished = False

    @property
    def violations(self) -> List[Violation]:
        return sort_violations(self.monitor.violations + self._violations)

    @property
    def notes(self) -> List[Note]:
        return self.monitor.notes + self._notes

    def step(self, snapshot: Snapshot) -> List[Violation]:
        """Feed the next snapshot; returns the online violations decided at this step"""
        new = self.monitor.step(snapshot)
        if self.offline:
            self.trace.append(snapshot)
        return new

    def finish(self) -> List[Violation]:
        if self._finished:
            return []
        new = self.monitor.finish()
        self._finished = True
        for index, constraint in self.offline:
            verdict = eval_offline(constraint, self.trace, index)
            logger.debug('offline check of "%s": %d violations',
                         constraint.description, len(verdict.violations))
            self._violations.extend(verdict.violations)
            self._notes.extend(verdict.notes)
        return sort_violations(new + self._violations)


def verify_trace(constraints: Sequence[A.Constraint], trace: Sequence[Snapshot],
                 trace_length: Optional[int] = None) -> TraceVerifier:
    """Replay a trace through a fresh verifier and finish it"""
    verifier = TraceVerifier(constraints, trace_length)
    for snapshot in trace:
        verifier.step(snapshot)
    verifier.finish()
    return verifier
