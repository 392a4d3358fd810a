"""
FCL formula grammar (Lark, LALR) and the transformer building fcl.ast nodes.

Precedence, lowest first: forall/exists, implies (right associative), or, and,
prefix not / within[n, t], atoms.
"""

from __future__ import annotations

from typing import Optional

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, VisitError
from lark.lexer import PatternStr

from fcl import ast as A
from fcl.render import unquote
from parsers.errors import DslSyntaxError

FORMULA_GRAMMAR = r"""
    ?formula: "forall" NAME "in" setexpr ":" formula         -> forall
            | "exists" NAME "in" setexpr ":" formula         -> exists
            | implication

    ?implication: disjunction "implies" formula              -> implies
                | disjunction

    ?disjunction: disjunction "or" conjunction               -> or_
                | conjunction

    ?conjunction: conjunction "and" negation                 -> and_
                | negation

    ?negation: "not" negation                                -> not_
             | "within" "[" bound "," bound "]" negation     -> within
             | atom

    ?atom: boolean
         | expr COMP_OP expr                                 -> compare
         | expr COMP_OP boolean                              -> compare
         | boolean COMP_OP expr                              -> compare
         | boolean COMP_OP boolean                           -> compare
         | expr "in" setexpr                                 -> member
         | "(" formula ")"

    boolean: "true"                                          -> true_
           | "false"                                         -> false_

    // expressions
    ?expr: sum

    ?sum: sum "+" product                                    -> add
        | sum "-" product                                    -> sub
        | product

    ?product: product "*" unary                              -> mul
            | unary

    ?unary: "-" unary                                        -> neg
          | eatom

    ?eatom: NUMBER                                           -> number
          | STRING                                           -> string
          | "count" "(" setexpr ")"                          -> count
          | "MAX"                                            -> max_value
          | "BEG"                                            -> beg_value
          | NAME "." NAME                                    -> attr
          | NAME                                             -> var
          | "(" expr ")"

    // sets
    ?setexpr: setexpr "intersect" setatom                    -> intersect
            | setexpr "union" setatom                        -> union
            | setatom

    ?setatom: NAME                                           -> setname
            | "{" NAME "in" setexpr "|" formula "}"          -> comprehension
            | "(" setexpr ")"

    // within bounds
    bound: NUMBER                                            -> bound_literal
         | "-" NUMBER                                        -> bound_negative
         | NUMBER "*" "MAX"                                  -> bound_scaled_max
         | NUMBER "*" "BEG"                                  -> bound_scaled_beg
         | "MAX"                                             -> bound_max
         | "BEG"                                             -> bound_beg
         | "INF"                                             -> bound_inf

    COMP_OP: "==" | "!=" | "<=" | ">=" | "<" | ">"
    NUMBER: /\d+(\.\d+)?([eE][+-]?\d+)?/
    STRING: /"(?:[^"\\\n]|\\.)*"/ | /'(?:[^'\\\n]|\\.)*'/
    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_parser = Lark(
    FORMULA_GRAMMAR,
    parser="lalr",
    start=["formula", "setexpr"],
    propagate_positions=True,
)


def _number(text: str):
    if any(c in text for c in ".eE"):
        return float(text)
    return int(text)


def _integer_bound(token: Token) -> int:
    value = _number(str(token))
    if not isinstance(value, int):
        raise DslSyntaxError(
            f"window bound {token} must be an integer", token.line, token.column,
            hint="use a factor only with MAX or BEG, e.g. 0.8*MAX",
        )
    return value


@v_args(meta=True)
class FormulaBuilder(Transformer):
    """Turns a Lark parse tree into fcl.ast nodes; lines are shifted by line_offset"""

    def __init__(self, line_offset: int = 0):
        super().__init__()
        self.line_offset = line_offset

    def _pos(self, meta) -> Optional[A.Position]:
        if getattr(meta, "empty", True):
            return None
        return A.Position(meta.line + self.line_offset, meta.column)

    def _token_pos(self, token: Token) -> Optional[A.Position]:
        if token.line is None:
            return None
        return A.Position(token.line + self.line_offset, token.column)

    # --- formulas ---

    def forall(self, meta, children):
        var, source, body = children
        return A.ForAll(str(var), source, body, self._pos(meta))

    def exists(self, meta, children):
        var, source, body = children
        return A.Exists(str(var), source, body, self._pos(meta))

    def implies(self, meta, children):
        return A.Implies(children[0], children[1], self._pos(meta))

    def or_(self, meta, children):
        return A.Or(children[0], children[1], self._pos(meta))

    def and_(self, meta, children):
        return A.And(children[0], children[1], self._pos(meta))

    def not_(self, meta, children):
        return A.Not(children[0], self._pos(meta))

    def within(self, meta, children):
        n, t, body = children
        return A.Within(n, t, body, self._pos(meta))

    def true_(self, meta, children):
        return A.Const(True, self._pos(meta))

    def false_(self, meta, children):
        return A.Const(False, self._pos(meta))

    def compare(self, meta, children):
        left, op, right = (
            A.Literal(child.value, child.pos) if isinstance(child, A.Const) else child
            for child in children
        )
        return A.Compare(str(op), left, right, self._pos(meta))

    def member(self, meta, children):
        return A.Member(children[0], children[1], self._pos(meta))

    # --- expressions ---

    def add(self, meta, children):
        return A.Arith("+", children[0], children[1], self._pos(meta))

    def sub(self, meta, children):
        return A.Arith("-", children[0], children[1], self._pos(meta))

    def mul(self, meta, children):
        return A.Arith("*", children[0], children[1], self._pos(meta))

    def neg(self, meta, children):
        operand = children[0]
        if isinstance(operand, A.Literal) and not isinstance(operand.value, str) and operand.value >= 0:
            return A.Literal(-operand.value, self._pos(meta))
        return A.Arith("-", A.Literal(0), operand, self._pos(meta))

    def number(self, meta, children):
        return A.Literal(_number(str(children[0])), self._pos(meta))

    def string(self, meta, children):
        return A.Literal(unquote(str(children[0])[1:-1]), self._pos(meta))

    def count(self, meta, children):
        return A.Count(children[0], self._pos(meta))

    def max_value(self, meta, children):
        return A.Endcount(A.EndcountKind.MAX, self._pos(meta))

    def beg_value(self, meta, children):
        return A.Endcount(A.EndcountKind.BEG, self._pos(meta))

    def attr(self, meta, children):
        owner, name = children
        return A.Attr(A.Var(str(owner), self._token_pos(owner)), str(name), self._pos(meta))

    def var(self, meta, children):
        return A.Var(str(children[0]), self._pos(meta))

    # --- sets ---

    def setname(self, meta, children):
        return A.SetName(str(children[0]), self._pos(meta))

    def comprehension(self, meta, children):
        var, source, predicate = children
        return A.Comprehension(str(var), source, predicate, self._pos(meta))

    def intersect(self, meta, children):
        return A.SetOp("intersect", children[0], children[1], self._pos(meta))

    def union(self, meta, children):
        return A.SetOp("union", children[0], children[1], self._pos(meta))

    # --- bounds ---

    def bound_literal(self, meta, children):
        return A.Bound.literal(_integer_bound(children[0]))

    def bound_negative(self, meta, children):
        return A.Bound.literal(-_integer_bound(children[0]))

    def bound_scaled_max(self, meta, children):
        return A.Bound(A.BoundKind.MAX, factor=float(children[0]))

    def bound_scaled_beg(self, meta, children):
        return A.Bound(A.BoundKind.BEG, factor=float(children[0]))

    def bound_max(self, meta, children):
        return A.MAX

    def bound_beg(self, meta, children):
        return A.BEG

    def bound_inf(self, meta, children):
        return A.INF


def _describe_terminal(name: str) -> str:
    try:
        terminal = _parser.get_terminal(name)
    except KeyError:
        return name
    if isinstance(terminal.pattern, PatternStr):
        return f"'{terminal.pattern.value}'"
    return name


def _expected_hint(exc: UnexpectedInput) -> str:
    expected = getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ()
    names = sorted({_describe_terminal(name) for name in expected if name != "$END"})
    if not names:
        return ""
    return "expected one of " + ", ".join(names)


def _syntax_error(exc: UnexpectedInput, text: str, line_offset: int) -> DslSyntaxError:
    line = getattr(exc, "line", None)
    column = getattr(exc, "column", None)
    if line is None or line < 1:
        lines = text.splitlines() or [""]
        line, column = len(lines), len(lines[-1]) + 1
    if isinstance(exc, UnexpectedCharacters):
        message = f"unexpected character {text[exc.pos_in_stream]!r}"
    else:
        token = getattr(exc, "token", None)
        if token is None or token.type == "$END":
            message = "unexpected end of formula"
        else:
            message = f"unexpected {str(token)!r}"
    return DslSyntaxError(message, line + line_offset, column, hint=_expected_hint(exc))


def _parse(text: str, start: str, line: int):
    line_offset = line - 1
    try:
        tree = _parser.parse(text, start=start)
    except UnexpectedInput as exc:
        raise _syntax_error(exc, text, line_offset) from None
    try:
        return FormulaBuilder(line_offset).transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, DslSyntaxError):
            error = exc.orig_exc
            if error.line is not None:
                error.line += line_offset
            raise error from None
        raise


def parse_formula(text: str, line: int = 1) -> A.Formula:
    """Parse a formula; `line` is the file line of the first line of text"""
    return _parse(text, "formula", line)


def parse_setexpr(text: str, line: int = 1) -> A.SetExpr:
    return _parse(text, "setexpr", line)
