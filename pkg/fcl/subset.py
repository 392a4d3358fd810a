"""
Static checks on constraints: general well-formedness, and membership in the
online-checkable subset (single implication, no nested within, forward windows
only as the top-level construct or the implication consequent, backward
windows only in the antecedent).
"""

from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

from fcl import ast as A
from fcl.bounds import check_bounds
from fcl.errors import FclLoadError
from fcl.evaluator import analyse

logger = logging.getLogger(__name__)

Indexed = List[Tuple[int, A.Constraint]]


def _unbound_plain_vars(node, bound: frozenset = frozenset()) -> set:
    """Variables used as values (not as attribute owners) without a binder"""
    if isinstance(node, A.Var):
        return set() if node.name in bound else {node.name}
    if isinstance(node, A.Attr):
        return set()
    if isinstance(node, (A.ForAll, A.Exists)):
        return _unbound_plain_vars(node.source, bound) | \
            _unbound_plain_vars(node.body, bound | {node.var})
    if isinstance(node, A.Comprehension):
        return _unbound_plain_vars(node.source, bound) | \
            _unbound_plain_vars(node.predicate, bound | {node.var})
    result = set()
    for child in A.children(node):
        result |= _unbound_plain_vars(child, bound)
    return result


def _bound_variables(node) -> set:
    return {n.var for n in A.walk(node) if isinstance(n, (A.ForAll, A.Exists, A.Comprehension))}


def well_formedness_problems(constraint: A.Constraint) -> List[str]:
    problems = []
    if not constraint.description.strip():
        problems.append("empty description")
    defined = set()
    for let in constraint.lets:
        if let.name in defined:
            problems.append(f"let '{let.name}' is defined twice")
        later = {l.name for l in constraint.lets} - defined
        for name in A.set_names(let.source) & later:
            problems.append(f"let '{let.name}' refers to '{name}' before its definition")
        if A.contains_within(let.source):
            problems.append(f"let '{let.name}' must not use within")
        for name in _unbound_plain_vars(let.source):
            problems.append(f"unbound variable '{name}' in let '{let.name}'")
        defined.add(let.name)
    for name in sorted(_unbound_plain_vars(constraint.body)):
        problems.append(f"unbound variable '{name}'")
    for node in A.walk(constraint.body):
        if isinstance(node, A.Within):
            problems.extend(check_bounds(node))
        if isinstance(node, A.Comprehension) and A.contains_within(node.predicate):
            problems.append("set comprehensions must be state-level (no within)")
    return problems


def online_problems(constraint: A.Constraint) -> List[str]:
    problems = []
    body = constraint.body
    withins = [n for n in A.walk(body) if isinstance(n, A.Within)]

    if any(A.contains_within(w.body) for w in withins):
        problems.append("nested within is not supported online")

    implications = sum(
        1 for root in (body, *[l.source for l in constraint.lets])
        for n in A.walk(root) if isinstance(n, A.Implies)
    )
    if implications > 1:
        problems.append("only one implication is allowed in a constraint")

    shape = analyse(constraint)
    allowed_forward = {id(shape.obligation)} if shape.obligation is not None else set()
    antecedent_nodes = set()
    if isinstance(shape.psi, A.Implies):
        antecedent_nodes = {id(n) for n in A.walk(shape.psi.antecedent)}

    quantified = _bound_variables(body)
    for w in withins:
        if w.is_forward:
            if id(w) not in allowed_forward:
                problems.append(
                    "a forward within must be the top-level construct or the consequent "
                    "of the top-level implication"
                )
            continue
        if id(w) not in antecedent_nodes:
            problems.append("a backward within is only allowed in the antecedent of an implication")
        if A.free_variables(w.body) & quantified:
            problems.append("a backward within must not use quantified variables")
        for bound in (w.n, w.t):
            if bound.kind not in (A.BoundKind.LITERAL, A.BoundKind.BEG):
                problems.append("backward window bounds must be literals or BEG")
                break

    for w in withins:
        if A.uses_endcount_value(w.body, A.EndcountKind.MAX):
            problems.append("MAX as a value is not allowed inside within")
    sources = [source for _, source in shape.prefix]
    sources += [source for _, source in shape.consequent_prefix]
    sources += [let.source for let in constraint.lets]
    if any(A.uses_endcount_value(s, A.EndcountKind.MAX) for s in sources):
        problems.append("MAX as a value is not allowed in quantifier domains or lets")
    return problems


def split_online(constraints: Sequence[A.Constraint]) -> Tuple[Indexed, Indexed]:
    """
    Split constraints into those the online monitor accepts and those left to
    the offline oracle, keeping their positions. Constraints that are not well
    formed are an error in either case.
    """
    problems = [
        f'constraint "{constraint.description}": {problem}'
        for constraint in constraints
        for problem in well_formedness_problems(constraint)
    ]
    if problems:
        raise FclLoadError(problems)
    online: Indexed = []
    offline: Indexed = []
    for index, constraint in enumerate(constraints):
        reasons = online_problems(constraint)
        if reasons:
            logger.warning('constraint "%s" is checked offline: %s',
                           constraint.description, "; ".join(reasons))
            offline.append((index, constraint))
        else:
            online.append((index, constraint))
    return online, offline
