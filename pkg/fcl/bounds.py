"""
Endcount and window resolution for the within operator.

A window bound t > 0 looks at steps i+1..i+t, t < 0 at steps i-|t|..i-1.
MAX is the number of steps left after i, BEG the number of steps before i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional

from fcl.ast import Bound, BoundKind, Within
from fcl.errors import FclLoadError, UnresolvedEndcountError


class BoundRole(str, Enum):
    COUNT = "count-n"
    WINDOW = "window-t"


def endcount(kind: BoundKind, step: int, length: Optional[int]) -> int:
    if kind == BoundKind.BEG:
        return step
    if length is None:
        raise UnresolvedEndcountError("MAX is unknown until the trace ends")
    return length - 1 - step


def _scaled(bound: Bound, value: int) -> int:
    if bound.factor is None:
        return value
    # exact decimal arithmetic, 0.29*100 must give 29
    return max(0, math.floor(Fraction(repr(bound.factor)) * value))


def resolve_bound(bound: Bound, step: int, length: Optional[int], role: BoundRole,
                  n: Optional[int] = None) -> int:
    """
    Resolve a single bound at anchor step.

    For role WINDOW the result is signed (negative for backward windows). When the
    resolved count n is given, literal windows are clamped to the endcounts.
    """
    kind = bound.kind
    if kind == BoundKind.LITERAL:
        value = bound.value
        if role == BoundRole.WINDOW and n is not None:
            if value > 0 and length is not None:
                available = length - 1 - step
                if value > available and n <= available:
                    return available
            elif value < 0 and abs(value) > step and n <= step:
                return -step
        return value
    if kind == BoundKind.INF:
        if role == BoundRole.COUNT:
            raise FclLoadError(["INF as a count needs an INF or MAX window"])
        return endcount(BoundKind.MAX, step, length)
    value = _scaled(bound, endcount(kind, step, length))
    if role == BoundRole.WINDOW and kind == BoundKind.BEG:
        return -value
    return value


@dataclass(frozen=True)
class ResolvedWindow:
    n: int
    t: int

    @property
    def vacuous(self) -> bool:
        return self.n == 0 or self.t == 0

    @property
    def impossible(self) -> bool:
        return self.n > abs(self.t)

    def steps(self, anchor: int, length: int) -> range:
        """Window steps that exist in a trace of the given length"""
        if self.t > 0:
            return range(anchor + 1, min(anchor + self.t, length - 1) + 1)
        return range(max(anchor + self.t, 0), anchor)

    def truncated(self, anchor: int, length: int) -> bool:
        return self.t > 0 and anchor + self.t > length - 1


def resolve_window(node: Within, step: int, length: Optional[int]) -> ResolvedWindow:
    """Resolve (n, t) of a within node at anchor step, applying clamping"""
    if node.n.kind == BoundKind.INF:
        t = resolve_bound(node.t, step, length, BoundRole.WINDOW)
        return ResolvedWindow(abs(t), t)
    n = resolve_bound(node.n, step, length, BoundRole.COUNT)
    t = resolve_bound(node.t, step, length, BoundRole.WINDOW, n=n)
    return ResolvedWindow(n, t)


def check_bounds(node: Within) -> List[str]:
    """Static checks on the bounds of a within node"""
    problems = []
    for name, bound in (("count", node.n), ("window", node.t)):
        if bound.factor is not None and not 0 < bound.factor <= 1:
            problems.append(f"{name} factor {bound.factor} must lie in (0, 1]")
        if bound.factor is not None and bound.kind not in (BoundKind.MAX, BoundKind.BEG):
            problems.append(f"{name} factor needs MAX or BEG")
    if node.n.kind == BoundKind.LITERAL and node.n.value < 0:
        problems.append(f"count {node.n.value} must not be negative")
    if node.n.kind == BoundKind.INF and node.t.kind not in (BoundKind.INF, BoundKind.MAX):
        problems.append("INF as a count needs an INF or MAX window")
    if node.n.kind == BoundKind.INF and node.t.factor is not None:
        problems.append("INF as a count needs an unscaled window")
    return problems
