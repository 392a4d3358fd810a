"""
Render FCL nodes back to FCDSL text with minimal parentheses.
parse(render(node)) == node for every node the grammar can produce.
"""

from __future__ import annotations

import re

from fcl import ast as A

# formula levels
_QUANT, _IMPLIES, _OR, _AND, _UNARY, _ATOM = range(6)
# expression levels
_SUM, _PRODUCT, _NEG, _EATOM = range(1, 5)
# set levels
_SETOP, _SATOM = 1, 2


# quoted strings: backslash escapes the next character
DOUBLE_QUOTED = r'"((?:[^"\\\n]|\\.)*)"'
SINGLE_QUOTED = r"'((?:[^'\\\n]|\\.)*)'"


def unquote(body: str) -> str:
    """Undo the escapes of a quoted string body (without its quotes)"""
    return re.sub(r"\\(.)", r"\1", body)


def render_string(text: str) -> str:
    if "\\" not in text and "\n" not in text:
        if '"' not in text:
            return f'"{text}"'
        if "'" not in text:
            return f"'{text}'"
    if "\n" in text:
        raise ValueError(f"string literals cannot span lines: {text!r}")
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render_number(value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not numeric literals")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_bound(bound: A.Bound) -> str:
    if bound.kind == A.BoundKind.LITERAL:
        return str(bound.value)
    name = bound.kind.value
    if bound.factor is not None:
        return f"{bound.factor!r}*{name}"
    return name


# ══════════════════════════════════════════════════════════════
# Expressions
# ══════════════════════════════════════════════════════════════

def _expr(node, minimum: int) -> str:
    text, level = _expr_level(node)
    return f"({text})" if level < minimum else text


def _expr_level(node):
    if isinstance(node, A.Literal):
        if isinstance(node.value, bool):
            return ("true" if node.value else "false"), _EATOM
        if isinstance(node.value, str):
            return render_string(node.value), _EATOM
        text = render_number(node.value)
        return text, (_NEG if text.startswith("-") else _EATOM)
    if isinstance(node, A.Var):
        return node.name, _EATOM
    if isinstance(node, A.Attr):
        return f"{node.target.name}.{node.name}", _EATOM
    if isinstance(node, A.Count):
        return f"count({render_set(node.source)})", _EATOM
    if isinstance(node, A.Endcount):
        return node.kind.value, _EATOM
    if isinstance(node, A.Arith):
        if node.op == "*":
            return f"{_expr(node.left, _PRODUCT)} * {_expr(node.right, _NEG)}", _PRODUCT
        return f"{_expr(node.left, _SUM)} {node.op} {_expr(node.right, _PRODUCT)}", _SUM
    raise TypeError(f"not an expression: {node!r}")


def render_expr(node) -> str:
    return _expr(node, 0)


# ══════════════════════════════════════════════════════════════
# Sets
# ══════════════════════════════════════════════════════════════

def _set(node, minimum: int) -> str:
    if isinstance(node, A.SetName):
        return node.name
    if isinstance(node, A.Comprehension):
        return f"{{ {node.var} in {render_set(node.source)} | {render_formula(node.predicate)} }}"
    if isinstance(node, A.SetOp):
        text = f"{_set(node.left, _SETOP)} {node.op} {_set(node.right, _SATOM)}"
        return f"({text})" if minimum > _SETOP else text
    raise TypeError(f"not a set expression: {node!r}")


def render_set(node) -> str:
    return _set(node, 0)


# ══════════════════════════════════════════════════════════════
# Formulas
# ══════════════════════════════════════════════════════════════

def _formula(node, minimum: int) -> str:
    text, level = _formula_level(node)
    return f"({text})" if level < minimum else text


def _formula_level(node):
    if isinstance(node, A.Const):
        return ("true" if node.value else "false"), _ATOM
    if isinstance(node, A.Compare):
        return f"{render_expr(node.left)} {node.op} {render_expr(node.right)}", _ATOM
    if isinstance(node, A.Member):
        return f"{render_expr(node.element)} in {render_set(node.target)}", _ATOM
    if isinstance(node, A.Not):
        return f"not {_formula(node.operand, _UNARY)}", _UNARY
    if isinstance(node, A.Within):
        bounds = f"{render_bound(node.n)}, {render_bound(node.t)}"
        return f"within[{bounds}] {_formula(node.body, _UNARY)}", _UNARY
    if isinstance(node, A.And):
        return f"{_formula(node.left, _AND)} and {_formula(node.right, _UNARY)}", _AND
    if isinstance(node, A.Or):
        return f"{_formula(node.left, _OR)} or {_formula(node.right, _AND)}", _OR
    if isinstance(node, A.Implies):
        return (
            f"{_formula(node.antecedent, _OR)} implies {_formula(node.consequent, _QUANT)}",
            _IMPLIES,
        )
    if isinstance(node, (A.ForAll, A.Exists)):
        keyword = "forall" if isinstance(node, A.ForAll) else "exists"
        return (
            f"{keyword} {node.var} in {render_set(node.source)}: {_formula(node.body, _QUANT)}",
            _QUANT,
        )
    raise TypeError(f"not a formula: {node!r}")


def render_formula(node) -> str:
    return _formula(node, _QUANT)


def render(node) -> str:
    """Render any expression, set expression or formula node"""
    if isinstance(node, (A.Literal, A.Var, A.Attr, A.Count, A.Endcount, A.Arith)):
        return render_expr(node)
    if isinstance(node, (A.SetName, A.Comprehension, A.SetOp)):
        return render_set(node)
    return render_formula(node)


def render_constraint(constraint: A.Constraint, indent: str = "    ") -> str:
    lines = [f"constraint {render_string(constraint.description)}"]
    for let in constraint.lets:
        lines.append(f"{indent}let {let.name} = {render_set(let.source)}")
    lines.append(f"{indent}{render_formula(constraint.body)}")
    return "\n".join(lines) + "\n"


def render_constraints(constraints) -> str:
    return "\n".join(render_constraint(c) for c in constraints)
