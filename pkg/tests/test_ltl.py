from hypothesis import given, settings
from hypothesis import strategies as st

from fcl import ast as A
from fcl import eval_offline, monitor_trace
from fcl.evaluator import AnchorKind, analyse
from fcl.ltl import LtlOperator, future, globally, ltl_bridge, next_
from tests.helpers import snap
from tests.ltl_reference import holds

PROPOSITIONS = ("p", "q")
BRIDGE = {"next": ("X",), "future": ("WX", "F"), "globally": ("WX", "G")}


def atom(name):
    return A.Compare("==", A.Attr(A.Var("sensor"), name), A.Literal(1))


def to_fcl(formula):
    op = formula[0]
    if op == "atom":
        return atom(formula[1])
    if op == "not":
        return A.Not(to_fcl(formula[1]))
    if op == "and":
        return A.And(to_fcl(formula[1]), to_fcl(formula[2]))
    if op == "or":
        return A.Or(to_fcl(formula[1]), to_fcl(formula[2]))
    return ltl_bridge(LtlOperator(op), to_fcl(formula[1]))


def to_reference(formula):
    op = formula[0]
    if op == "atom":
        return formula
    if op in BRIDGE:
        result = to_reference(formula[1])
        for wrapper in reversed(BRIDGE[op]):
            result = (wrapper, result)
        return result
    return (op,) + tuple(to_reference(part) for part in formula[1:])


def as_trace(valuation):
    return [
        snap(step, beyond_control={"sensor": {name: int(values[name]) for name in PROPOSITIONS}})
        for step, values in enumerate(valuation)
    ]


atoms = st.sampled_from(PROPOSITIONS).map(lambda name: ("atom", name))
state_formulas = st.recursive(
    atoms,
    lambda inner: st.one_of(
        inner.map(lambda f: ("not", f)),
        st.tuples(st.sampled_from(["and", "or"]), inner, inner),
    ),
    max_leaves=3,
)
temporal_formulas = st.recursive(
    atoms,
    lambda inner: st.one_of(
        inner.map(lambda f: ("not", f)),
        st.tuples(st.sampled_from(["and", "or"]), inner, inner),
        st.tuples(st.sampled_from(sorted(BRIDGE)), inner),
    ),
    max_leaves=4,
)
valuations = st.lists(
    st.fixed_dictionaries({name: st.booleans() for name in PROPOSITIONS}), min_size=1, max_size=12
)


def test_bridge_shapes():
    phi = atom("p")
    assert next_(phi) == A.Within(A.Bound.literal(1), A.Bound.literal(1), phi)
    assert future(phi) == A.Within(A.Bound.literal(1), A.INF, phi)
    assert globally(phi) == A.Within(A.INF, A.INF, phi)


def test_single_step_trace():
    trace = as_trace([{"p": False, "q": False}])
    phi = atom("p")
    assert not eval_offline(A.Constraint("next", (), next_(phi)), trace).satisfied
    assert eval_offline(A.Constraint("future", (), future(phi)), trace).satisfied
    assert eval_offline(A.Constraint("globally", (), globally(phi)), trace).satisfied


def test_future_looks_past_the_anchor():
    trace = as_trace([{"p": True, "q": False}, {"p": False, "q": False}, {"p": True, "q": False}])
    assert eval_offline(A.Constraint("f", (), future(atom("p"))), trace).satisfied
    assert not eval_offline(A.Constraint("g", (), globally(atom("p"))), trace).satisfied
    assert not eval_offline(A.Constraint("x", (), next_(atom("p"))), trace).satisfied


@settings(max_examples=500)
@given(st.sampled_from(sorted(BRIDGE)), state_formulas, valuations)
def test_bridge_matches_reference_at_the_first_step(op, body, valuation):
    formula = (op, body)
    constraint = A.Constraint("bridge", (), to_fcl(formula))
    verdict = eval_offline(constraint, as_trace(valuation))
    assert verdict.satisfied == holds(to_reference(formula), valuation)


@settings(max_examples=200)
@given(temporal_formulas, valuations)
def test_nested_formulas_match_reference(formula, valuation):
    constraint = A.Constraint("nested", (), to_fcl(formula))
    verdict = eval_offline(constraint, as_trace(valuation))
    reference = to_reference(formula)
    if analyse(constraint).kind == AnchorKind.INITIAL:
        assert verdict.satisfied == holds(reference, valuation)
    else:
        # state formulas are checked at every step
        failing = [i for i in range(len(valuation)) if not holds(reference, valuation, i)]
        assert [v.step for v in verdict.violations] == failing


@settings(max_examples=200)
@given(st.sampled_from(sorted(BRIDGE)), state_formulas, valuations)
def test_monitor_agrees_on_bridge_formulas(op, body, valuation):
    constraint = A.Constraint("bridge", (), to_fcl((op, body)))
    trace = as_trace(valuation)
    online = monitor_trace([constraint], trace)
    offline = eval_offline(constraint, trace)
    assert [(v.anchor, v.step) for v in online.violations] == \
        [(v.anchor, v.step) for v in offline.violations]
