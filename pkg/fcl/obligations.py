"""
Temporal obligations: pending checks that a formula holds at least n times
within a forward window. The online monitor resolves them incrementally by
replaying the outcomes observed so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional

from fcl.ast import BoundKind, Within
from fcl.bounds import ResolvedWindow, resolve_window
from fcl.violations import Binding


class ObligationStatus(str, Enum):
    PENDING = "pending"
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    CANCELLED = "cancelled"


@dataclass(frozen=True)
class Resolution:
    status: ObligationStatus
    step: Optional[int]
    observed_true: int
    observed_false: int
    truncated: bool = False


_EXHAUSTED = object()


def settle(window: ResolvedWindow, anchor: int, length: int,
           outcomes: Iterable[Optional[bool]]) -> Resolution:
    """
    Replay outcomes of the window steps in order. None marks a step where a bound
    component was absent, which cancels the obligation. Returns PENDING when the
    outcomes run out before the window is decided.
    """
    if window.vacuous:
        return Resolution(ObligationStatus.SATISFIED, anchor, 0, 0)
    if window.impossible:
        return Resolution(ObligationStatus.VIOLATED, anchor, 0, 0)
    slack = abs(window.t) - window.n
    true = false = 0
    source = iter(outcomes)
    for step in window.steps(anchor, length):
        outcome = next(source, _EXHAUSTED)
        if outcome is _EXHAUSTED:
            return Resolution(ObligationStatus.PENDING, None, true, false)
        if outcome is None:
            return Resolution(ObligationStatus.CANCELLED, step, true, false)
        if outcome:
            true += 1
        else:
            false += 1
        if true >= window.n:
            return Resolution(ObligationStatus.SATISFIED, step, true, false)
        if false > slack:
            return Resolution(ObligationStatus.VIOLATED, step, true, false)
    return Resolution(ObligationStatus.VIOLATED, length - 1, true, false, truncated=True)


@dataclass
class TemporalObligation:
    constraint_index: int
    anchor: int
    binding: Binding
    node: Within
    window: Optional[ResolvedWindow] = None
    outcomes: List[Optional[bool]] = field(default_factory=list)
    status: ObligationStatus = ObligationStatus.PENDING
    resolution: Optional[Resolution] = None
    provisional: bool = False

    @property
    def observing(self) -> bool:
        """Still collecting outcomes"""
        if self.status != ObligationStatus.PENDING:
            return False
        if self.outcomes and self.outcomes[-1] is None:
            return False
        if self.node.t.kind == BoundKind.LITERAL and len(self.outcomes) >= self.node.t.value:
            return False
        return True

    def observe(self, outcome: Optional[bool]) -> None:
        self.outcomes.append(outcome)

    def early_resolution(self) -> Optional[Resolution]:
        """Decide without the trace length where the outcome cannot depend on it"""
        n_bound, t_bound = self.node.n, self.node.t
        if not n_bound.is_literal:
            return None
        if t_bound.factor is not None and n_bound.value > 0:
            # a scaled window may end before the observed steps
            return None
        if n_bound.value == 0:
            return Resolution(ObligationStatus.SATISFIED, self.anchor, 0, 0)
        true = false = 0
        for offset, outcome in enumerate(self.outcomes):
            if outcome is None:
                return None
            if outcome:
                true += 1
            else:
                false += 1
            if true >= n_bound.value:
                return Resolution(ObligationStatus.SATISFIED, self.anchor + 1 + offset, true, false)
        if t_bound.is_literal and len(self.outcomes) == t_bound.value:
            # all t steps exist, so no clamping can apply
            self.window = ResolvedWindow(n_bound.value, t_bound.value)
            return settle(self.window, self.anchor, self.anchor + t_bound.value + 1, self.outcomes)
        return None

    def resolve(self, length: Optional[int]) -> Optional[Resolution]:
        """Try to decide the obligation; returns the resolution once decided"""
        if self.status != ObligationStatus.PENDING:
            return self.resolution
        if length is None:
            result = self.early_resolution()
        else:
            if self.window is None:
                self.window = resolve_window(self.node, self.anchor, length)
            result = settle(self.window, self.anchor, length, self.outcomes)
        if result is None or result.status == ObligationStatus.PENDING:
            return None
        self.status = result.status
        self.resolution = result
        return result
