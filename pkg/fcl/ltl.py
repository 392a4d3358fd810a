"""Common LTL operators expressed with within"""

from enum import Enum

from fcl.ast import INF, Bound, Formula, Within


class LtlOperator(str, Enum):
    NEXT = "next"
    FUTURE = "future"
    GLOBALLY = "globally"


def ltl_bridge(op: LtlOperator, formula: Formula) -> Within:
    op = LtlOperator(op)
    if op == LtlOperator.NEXT:
        return Within(Bound.literal(1), Bound.literal(1), formula)
    if op == LtlOperator.FUTURE:
        return Within(Bound.literal(1), INF, formula)
    return Within(INF, INF, formula)


def next_(formula: Formula) -> Within:
    return ltl_bridge(LtlOperator.NEXT, formula)


def future(formula: Formula) -> Within:
    return ltl_bridge(LtlOperator.FUTURE, formula)


def globally(formula: Formula) -> Within:
    return ltl_bridge(LtlOperator.GLOBALLY, formula)
