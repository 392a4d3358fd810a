"""
FCL Abstract Syntax
Immutable node types for expressions, set expressions, formulas and constraints
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Iterator, Optional, Tuple, Union


@dataclass(frozen=True)
class Position:
    """Source position of a node (1-based line and column)"""
    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


def _pos():
    return field(default=None, compare=False, repr=False)


# ══════════════════════════════════════════════════════════════
# Values
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class ComponentRef:
    """A reference to a component, produced by binding a variable"""
    id: str

    def __str__(self) -> str:
        return self.id


Value = Union[int, float, str, bool, ComponentRef]


# ══════════════════════════════════════════════════════════════
# Expressions
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str, bool]
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Attr:
    """`target.name`; an unbound target names a beyond-control component"""
    target: Var
    name: str
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Count:
    source: "SetExpr"
    pos: Optional[Position] = _pos()


class EndcountKind(str, Enum):
    MAX = "MAX"
    BEG = "BEG"


@dataclass(frozen=True)
class Endcount:
    """MAX or BEG used as a value"""
    kind: EndcountKind
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Arith:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"
    pos: Optional[Position] = _pos()


Expr = Union[Literal, Var, Attr, Count, Endcount, Arith]


# ══════════════════════════════════════════════════════════════
# Set expressions
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class SetName:
    """Let name, ensemble id, ensemble family or component-type set"""
    name: str
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Comprehension:
    var: str
    source: "SetExpr"
    predicate: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class SetOp:
    op: str  # intersect | union
    left: "SetExpr"
    right: "SetExpr"
    pos: Optional[Position] = _pos()


SetExpr = Union[SetName, Comprehension, SetOp]


# ══════════════════════════════════════════════════════════════
# Bounds
# ══════════════════════════════════════════════════════════════

class BoundKind(str, Enum):
    LITERAL = "literal"
    MAX = "MAX"
    BEG = "BEG"
    INF = "INF"


@dataclass(frozen=True)
class Bound:
    kind: BoundKind
    value: int = 0
    factor: Optional[float] = None

    @classmethod
    def literal(cls, value: int) -> "Bound":
        return cls(BoundKind.LITERAL, value)

    @property
    def is_literal(self) -> bool:
        return self.kind == BoundKind.LITERAL

    @property
    def is_backward(self) -> bool:
        """True for windows looking into the past"""
        if self.kind == BoundKind.LITERAL:
            return self.value < 0
        return self.kind == BoundKind.BEG

    @property
    def needs_length(self) -> bool:
        """Resolving this bound requires the trace length"""
        return self.kind in (BoundKind.MAX, BoundKind.INF)


MAX = Bound(BoundKind.MAX)
BEG = Bound(BoundKind.BEG)
INF = Bound(BoundKind.INF)


# ══════════════════════════════════════════════════════════════
# Formulas
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Const:
    value: bool
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Compare:
    op: str  # one of == != < <= > >=
    left: Expr
    right: Expr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Member:
    element: Expr
    target: SetExpr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Not:
    operand: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class ForAll:
    var: str
    source: SetExpr
    body: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Exists:
    var: str
    source: SetExpr
    body: "Formula"
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Within:
    """Body holds at least n times within the window t"""
    n: Bound
    t: Bound
    body: "Formula"
    pos: Optional[Position] = _pos()

    @property
    def is_forward(self) -> bool:
        return not self.t.is_backward


Formula = Union[Const, Compare, Member, Not, And, Or, Implies, ForAll, Exists, Within]
Quantifier = (ForAll, Exists)


# ══════════════════════════════════════════════════════════════
# Constraints
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Let:
    name: str
    source: SetExpr
    pos: Optional[Position] = _pos()


@dataclass(frozen=True)
class Constraint:
    description: str
    lets: Tuple[Let, ...]
    body: Formula
    pos: Optional[Position] = _pos()

    def let_map(self) -> dict:
        return {let.name: let.source for let in self.lets}


# ══════════════════════════════════════════════════════════════
# Traversal helpers
# ══════════════════════════════════════════════════════════════

NODE_TYPES = (
    Literal, Var, Attr, Count, Endcount, Arith, SetName, Comprehension, SetOp,
    Const, Compare, Member, Not, And, Or, Implies, ForAll, Exists, Within,
)


def children(node) -> Iterator:
    """Yield the direct child nodes of an AST node"""
    for f in fields(node):
        if f.name == "pos":
            continue
        value = getattr(node, f.name)
        if isinstance(value, NODE_TYPES):
            yield value


def walk(node) -> Iterator:
    """Pre-order traversal"""
    yield node
    for child in children(node):
        yield from walk(child)


def contains_within(node) -> bool:
    return any(isinstance(n, Within) for n in walk(node))


def free_variables(node, bound: frozenset = frozenset()) -> set:
    """Variables used in node that are not bound inside it (attribute targets included)"""
    if isinstance(node, Var):
        return set() if node.name in bound else {node.name}
    if isinstance(node, (ForAll, Exists)):
        return free_variables(node.source, bound) | free_variables(node.body, bound | {node.var})
    if isinstance(node, Comprehension):
        return free_variables(node.source, bound) | free_variables(node.predicate, bound | {node.var})
    result = set()
    for child in children(node):
        result |= free_variables(child, bound)
    return result


def set_names(node) -> set:
    return {n.name for n in walk(node) if isinstance(n, SetName)}


def uses_endcount_value(node, kind: Optional[EndcountKind] = None) -> bool:
    """True if MAX/BEG appear as values (not as within bounds) inside node"""
    return any(
        isinstance(n, Endcount) and (kind is None or n.kind == kind)
        for n in walk(node)
    )
