"""
FCL evaluation.

`Evaluator` evaluates state-level formulas over a single snapshot; `within`
nodes are delegated to a hook so the offline oracle (whole trace available) and
the online monitor (history buffers) share every other rule. `eval_offline`
is the brute-force reference verifier over a complete trace.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from fcl import ast as A
from fcl.bounds import endcount, resolve_window
from fcl.errors import (
    FclTypeError,
    MissingComponentError,
    UnboundVariableError,
    UnknownNameError,
)
from fcl.obligations import ObligationStatus, Resolution
from fcl.render import render, render_bound
from fcl.trace import Snapshot, validate_trace
from fcl.violations import FUNCTIONAL, Binding, Note, Violation, sort_violations

logger = logging.getLogger(__name__)

WithinHook = Callable[[A.Within, Snapshot, dict], bool]


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _type_name(value) -> str:
    if isinstance(value, A.ComponentRef):
        return "component"
    if isinstance(value, bool):
        return "boolean"
    if _is_number(value):
        return "number"
    return type(value).__name__


class Evaluator:
    """Evaluates expressions, sets and state-level formulas against snapshots"""

    def __init__(self, lets: Optional[Mapping[str, A.SetExpr]] = None,
                 length: Optional[int] = None, within_hook: Optional[WithinHook] = None):
        self.lets = dict(lets or {})
        self.length = length
        self.within_hook = within_hook
        self._cache_snapshot = None
        self._let_cache: Dict[str, frozenset] = {}

    # --- expressions ---

    def expr(self, node, snapshot: Snapshot, env: dict):
        if isinstance(node, A.Literal):
            return node.value
        if isinstance(node, A.Var):
            if node.name not in env:
                raise UnboundVariableError(f"unbound variable '{node.name}'", node.name, snapshot.step)
            return env[node.name]
        if isinstance(node, A.Attr):
            return self._attr(node, snapshot, env)
        if isinstance(node, A.Count):
            return len(self.set(node.source, snapshot, env))
        if isinstance(node, A.Endcount):
            return endcount(A.BoundKind(node.kind.value), snapshot.step, self.length)
        if isinstance(node, A.Arith):
            left = self.expr(node.left, snapshot, env)
            right = self.expr(node.right, snapshot, env)
            if not (_is_number(left) and _is_number(right)):
                raise FclTypeError(
                    f"'{node.op}' needs numbers, got {_type_name(left)} and {_type_name(right)}",
                    render(node), snapshot.step,
                )
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            return left * right
        raise TypeError(f"not an expression: {node!r}")

    def _attr(self, node: A.Attr, snapshot: Snapshot, env: dict):
        owner = node.target.name
        if owner in env:
            ref = env[owner]
            if not isinstance(ref, A.ComponentRef):
                raise FclTypeError(f"'{owner}' is not a component", owner, snapshot.step)
            component = snapshot.components.get(ref.id)
            if component is None:
                raise MissingComponentError(f"component '{ref.id}' is absent", ref.id, snapshot.step)
            if node.name == "id":
                return ref.id
            if node.name not in component.attrs:
                raise UnknownNameError(
                    f"component '{ref.id}' has no attribute '{node.name}'", node.name, snapshot.step
                )
            return component.attrs[node.name]
        if owner in snapshot.beyond_control:
            attrs = snapshot.beyond_control[owner]
            if node.name not in attrs:
                raise UnknownNameError(
                    f"'{owner}' has no attribute '{node.name}'", node.name, snapshot.step
                )
            return attrs[node.name]
        raise UnknownNameError(
            f"'{owner}' is neither a bound variable nor a beyond-control component",
            owner, snapshot.step,
        )

    # --- sets ---

    def set(self, node, snapshot: Snapshot, env: dict) -> frozenset:
        if isinstance(node, A.SetName):
            return self.named_set(node.name, snapshot)
        if isinstance(node, A.Comprehension):
            members = set()
            for cid in sorted(self.set(node.source, snapshot, env)):
                inner = dict(env)
                inner[node.var] = A.ComponentRef(cid)
                if self.formula(node.predicate, snapshot, inner):
                    members.add(cid)
            return frozenset(members)
        if isinstance(node, A.SetOp):
            left = self.set(node.left, snapshot, env)
            right = self.set(node.right, snapshot, env)
            return left & right if node.op == "intersect" else left | right
        raise TypeError(f"not a set expression: {node!r}")

    def named_set(self, name: str, snapshot: Snapshot) -> frozenset:
        if self._cache_snapshot is not snapshot:
            self._cache_snapshot = snapshot
            self._let_cache = {}
        if name in self.lets:
            if name not in self._let_cache:
                self._let_cache[name] = self.set(self.lets[name], snapshot, {})
            return self._let_cache[name]
        if name in snapshot.ensembles:
            return frozenset(snapshot.ensembles[name])
        found, members = snapshot.ensemble_family(name)
        if found:
            return members
        if name.endswith("s") and len(name) > 1:
            return snapshot.of_type(name[:-1])
        raise UnknownNameError(f"unknown set '{name}'", name, snapshot.step)

    # --- formulas ---

    def formula(self, node, snapshot: Snapshot, env: dict) -> bool:
        if isinstance(node, A.Const):
            return node.value
        if isinstance(node, A.Compare):
            left = self.expr(node.left, snapshot, env)
            right = self.expr(node.right, snapshot, env)
            return self._compare(node, left, right, snapshot.step)
        if isinstance(node, A.Member):
            element = self.expr(node.element, snapshot, env)
            if isinstance(element, A.ComponentRef):
                element = element.id
            elif not isinstance(element, str):
                raise FclTypeError(
                    f"membership needs a component, got {_type_name(element)}",
                    render(node.element), snapshot.step,
                )
            return element in self.set(node.target, snapshot, env)
        if isinstance(node, A.Not):
            return not self.formula(node.operand, snapshot, env)
        if isinstance(node, A.And):
            return self.formula(node.left, snapshot, env) and self.formula(node.right, snapshot, env)
        if isinstance(node, A.Or):
            return self.formula(node.left, snapshot, env) or self.formula(node.right, snapshot, env)
        if isinstance(node, A.Implies):
            return (not self.formula(node.antecedent, snapshot, env)) or \
                self.formula(node.consequent, snapshot, env)
        if isinstance(node, (A.ForAll, A.Exists)):
            results = (
                self.formula(node.body, snapshot, {**env, node.var: A.ComponentRef(cid)})
                for cid in sorted(self.set(node.source, snapshot, env))
            )
            return all(results) if isinstance(node, A.ForAll) else any(results)
        if isinstance(node, A.Within):
            if self.within_hook is None:
                raise FclTypeError("temporal operator in a state-level formula", "within", snapshot.step)
            return self.within_hook(node, snapshot, env)
        raise TypeError(f"not a formula: {node!r}")

    @staticmethod
    def _compare(node: A.Compare, left, right, step: int) -> bool:
        op = node.op
        if isinstance(left, A.ComponentRef):
            left = left.id
        if isinstance(right, A.ComponentRef):
            right = right.id
        if _is_number(left) and _is_number(right):
            pass
        elif op in ("==", "!=") and type(left) is type(right):
            pass
        else:
            raise FclTypeError(
                f"cannot compare {_type_name(left)} with {_type_name(right)} using '{op}'",
                render(node), step,
            )
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right

    # --- bindings ---

    def bindings(self, prefix: Sequence[Tuple[str, A.SetExpr]], snapshot: Snapshot,
                 env: Optional[dict] = None) -> List[Binding]:
        """All bindings of a forall prefix at a snapshot, ordered by component id"""
        results: List[Binding] = []
        env = dict(env or {})

        def expand(depth: int, current: dict, acc: tuple):
            if depth == len(prefix):
                results.append(acc)
                return
            var, source = prefix[depth]
            for cid in sorted(self.set(source, snapshot, current)):
                expand(depth + 1, {**current, var: A.ComponentRef(cid)}, acc + ((var, cid),))

        expand(0, env, ())
        return results


def binding_env(binding: Binding) -> dict:
    return {var: A.ComponentRef(cid) for var, cid in binding}


def binding_present(binding: Binding, snapshot: Snapshot) -> bool:
    return all(cid in snapshot.components for _, cid in binding)


def eval_state(formula, snapshot: Snapshot, env: Optional[dict] = None,
               lets: Optional[Mapping[str, A.SetExpr]] = None,
               length: Optional[int] = None) -> bool:
    """Evaluate a within-free formula on one snapshot"""
    if A.contains_within(formula):
        raise FclTypeError("eval_state does not accept within", "within", snapshot.step)
    return Evaluator(lets, length).formula(formula, snapshot, dict(env or {}))


# ══════════════════════════════════════════════════════════════
# Constraint shape
# ══════════════════════════════════════════════════════════════

class AnchorKind(str, Enum):
    INITIAL = "initial"          # forward within: one anchor per binding, at first appearance
    IMPLICATION = "implication"  # antecedent checked every step, consequent becomes obligations
    STATE = "state"              # checked every step as a plain formula


@dataclass(frozen=True)
class ConstraintShape:
    prefix: Tuple[Tuple[str, A.SetExpr], ...]
    psi: A.Formula
    kind: AnchorKind
    obligation: Optional[A.Within] = None
    antecedent: Optional[A.Formula] = None
    consequent_prefix: Tuple[Tuple[str, A.SetExpr], ...] = field(default=())


def peel_forall(formula) -> Tuple[Tuple[Tuple[str, A.SetExpr], ...], A.Formula]:
    prefix = []
    while isinstance(formula, A.ForAll):
        prefix.append((formula.var, formula.source))
        formula = formula.body
    return tuple(prefix), formula


def analyse(constraint: A.Constraint) -> ConstraintShape:
    prefix, psi = peel_forall(constraint.body)
    if isinstance(psi, A.Within) and psi.is_forward:
        return ConstraintShape(prefix, psi, AnchorKind.INITIAL, obligation=psi)
    if isinstance(psi, A.Implies):
        consequent_prefix, core = peel_forall(psi.consequent)
        if isinstance(core, A.Within) and core.is_forward:
            return ConstraintShape(
                prefix, psi, AnchorKind.IMPLICATION, obligation=core,
                antecedent=psi.antecedent, consequent_prefix=consequent_prefix,
            )
    return ConstraintShape(prefix, psi, AnchorKind.STATE)


# ══════════════════════════════════════════════════════════════
# Violation construction (shared with the online monitor)
# ══════════════════════════════════════════════════════════════

def obligation_violation(constraint: A.Constraint, index: int, anchor: int, binding: Binding,
                         node: A.Within, resolution: Resolution, window) -> Violation:
    subformula = render(node)
    if window is not None and window.impossible:
        detail = (
            f"'{subformula}' cannot hold: required {window.n} times "
            f"in a window of {abs(window.t)} steps"
        )
    else:
        first = anchor + 1
        last = resolution.step
        detail = (
            f"'{subformula}' held {resolution.observed_true} times and failed "
            f"{resolution.observed_false} times in steps {first}-{last}, "
            f"required {window.n if window else render_bound(node.n)}"
        )
        if resolution.truncated:
            detail += "; the trace ended before the window closed"
    return Violation(
        constraint=constraint.description,
        kind=FUNCTIONAL,
        step=resolution.step,
        anchor=anchor,
        constraint_index=index,
        binding=binding,
        detail=detail,
        observed_true=resolution.observed_true,
        observed_false=resolution.observed_false,
        required=window.n if window else None,
        window=window.t if window else None,
        subformula=subformula,
    )


def state_violation(constraint: A.Constraint, index: int, step: int, binding: Binding,
                    psi) -> Violation:
    subformula = render(psi)
    return Violation(
        constraint=constraint.description,
        kind=FUNCTIONAL,
        step=step,
        anchor=step,
        constraint_index=index,
        binding=binding,
        detail=f"'{subformula}' is false",
        subformula=subformula,
    )


def cancellation_note(constraint: A.Constraint, index: int, anchor: int, binding: Binding,
                      step: int) -> Note:
    return Note(
        constraint=constraint.description,
        constraint_index=index,
        anchor=anchor,
        step=step,
        message="obligation cancelled, a bound component left the system",
        binding=binding,
    )


# ══════════════════════════════════════════════════════════════
# Offline oracle
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Verdict:
    violations: Tuple[Violation, ...] = ()
    notes: Tuple[Note, ...] = ()

    @property
    def satisfied(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None


class _TraceWithin:
    """Boolean within over a whole trace; absent components count as false"""

    def __init__(self, trace: Sequence[Snapshot]):
        self.trace = trace
        self.evaluator: Optional[Evaluator] = None

    def __call__(self, node: A.Within, snapshot: Snapshot, env: dict) -> bool:
        length = len(self.trace)
        window = resolve_window(node, snapshot.step, length)
        if window.vacuous:
            return True
        if window.impossible:
            return False
        count = 0
        for step in window.steps(snapshot.step, length):
            try:
                if self.evaluator.formula(node.body, self.trace[step], env):
                    count += 1
            except MissingComponentError:
                pass
        return count >= window.n


def decide_window(window, anchor: int, length: int,
                  outcomes: Sequence[Optional[bool]]) -> Resolution:
    """
    Decide a forward obligation from the outcomes of its whole window at once.
    The decision step is where the n-th true step or the first false step past
    the slack falls, whichever comes first; None marks an absent component.
    """
    if window.vacuous:
        return Resolution(ObligationStatus.SATISFIED, anchor, 0, 0)
    if window.impossible:
        return Resolution(ObligationStatus.VIOLATED, anchor, 0, 0)
    steps = window.steps(anchor, length)
    observed = list(itertools.takewhile(lambda outcome: outcome is not None, outcomes))
    trues = list(itertools.accumulate(1 if outcome else 0 for outcome in observed))
    falses = [position + 1 - true for position, true in enumerate(trues)]
    slack = abs(window.t) - window.n

    satisfied = next((i for i, true in enumerate(trues) if true >= window.n), None)
    violated = next((i for i, false in enumerate(falses) if false > slack), None)
    decided = [i for i in (satisfied, violated) if i is not None]
    if decided:
        i = min(decided)
        status = ObligationStatus.SATISFIED if i == satisfied else ObligationStatus.VIOLATED
        return Resolution(status, steps[i], trues[i], falses[i])

    true, false = (trues[-1], falses[-1]) if trues else (0, 0)
    if len(observed) < len(outcomes):
        return Resolution(ObligationStatus.CANCELLED, steps[len(observed)], true, false)
    return Resolution(ObligationStatus.VIOLATED, length - 1, true, false, truncated=True)


def eval_offline(constraint: A.Constraint, trace: Sequence[Snapshot], index: int = 0) -> Verdict:
    """Verify one constraint against a complete trace by brute force"""
    validate_trace(trace)
    length = len(trace)
    hook = _TraceWithin(trace)
    evaluator = Evaluator(constraint.let_map(), length, hook)
    hook.evaluator = evaluator
    shape = analyse(constraint)
    violations: List[Violation] = []
    notes: List[Note] = []

    def obligation(anchor: int, binding: Binding, node: A.Within):
        window = resolve_window(node, anchor, length)
        env = binding_env(binding)

        outcomes: List[Optional[bool]] = []
        decidable = not (window.vacuous or window.impossible)
        for step in window.steps(anchor, length) if decidable else ():
            if not binding_present(binding, trace[step]):
                outcomes.append(None)
                break
            outcomes.append(evaluator.formula(node.body, trace[step], env))

        resolution = decide_window(window, anchor, length, outcomes)
        if resolution.status == ObligationStatus.VIOLATED:
            violations.append(
                obligation_violation(constraint, index, anchor, binding, node, resolution, window)
            )
        elif resolution.status == ObligationStatus.CANCELLED:
            notes.append(cancellation_note(constraint, index, anchor, binding, resolution.step))

    seen = set()
    for snapshot in trace:
        step = snapshot.step
        for binding in evaluator.bindings(shape.prefix, snapshot):
            if shape.kind == AnchorKind.INITIAL:
                if binding in seen:
                    continue
                seen.add(binding)
                obligation(step, binding, shape.obligation)
            elif shape.kind == AnchorKind.IMPLICATION:
                env = binding_env(binding)
                if not evaluator.formula(shape.antecedent, snapshot, env):
                    continue
                for extra in evaluator.bindings(shape.consequent_prefix, snapshot, env):
                    obligation(step, binding + extra, shape.obligation)
            else:
                if not evaluator.formula(shape.psi, snapshot, binding_env(binding)):
                    violations.append(state_violation(constraint, index, step, binding, shape.psi))

    return Verdict(tuple(sort_violations(violations)), tuple(notes))


def eval_offline_all(constraints: Sequence[A.Constraint], trace: Sequence[Snapshot]) -> Verdict:
    violations, notes = [], []
    for index, constraint in enumerate(constraints):
        verdict = eval_offline(constraint, trace, index)
        violations.extend(verdict.violations)
        notes.extend(verdict.notes)
    return Verdict(tuple(sort_violations(violations)), tuple(notes))
