import itertools
import random

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from fcl import (
    FclLoadError,
    Monitor,
    MonitorError,
    TraceVerifier,
    eval_offline_all,
    monitor_trace,
    split_online,
    verify_trace,
)
from fcl import ast as A
from fcl.bounds import ResolvedWindow
from fcl.evaluator import decide_window
from fcl.obligations import ObligationStatus, settle
from fcl.trace import ComponentState
from parsers.fcdsl import parse_constraints
from scenarios.dragon import ENSEMBLES
from tests.helpers import flags, snap, villager

VILLAGERS = {"V01": "Farmer", "V02": "Farmer", "V03": "Warrior", "V04": "Warrior"}


def constraints(*formulas):
    text = "\n".join(f'constraint "c{i}"\n    {formula}\n' for i, formula in enumerate(formulas))
    return list(parse_constraints(text))


def verdict_keys(violations):
    return sorted((v.constraint_index, v.anchor, v.binding, v.step) for v in violations)


def note_keys(notes):
    return sorted((n.constraint_index, n.anchor, n.binding, n.step) for n in notes)


# ══════════════════════════════════════════════════════════════
# Obligations
# ══════════════════════════════════════════════════════════════

class TestObligations:
    FORMULA = "within[1, 3] exists c in Items: c.ok == 1"

    def test_satisfied_inside_the_window(self):
        monitor = monitor_trace(constraints(self.FORMULA), flags([0, 0, 1, 0]))
        assert monitor.violations == []

    def test_violated_once_the_window_closes(self):
        monitor = Monitor(constraints(self.FORMULA))
        trace = flags([0, 0, 0, 0, 1])
        decided = [monitor.step(snapshot) for snapshot in trace]
        monitor.finish()
        assert [len(found) for found in decided] == [0, 0, 0, 1, 0]
        violation = decided[3][0]
        assert (violation.anchor, violation.step) == (0, 3)
        assert (violation.observed_true, violation.observed_false) == (0, 3)
        assert (violation.required, violation.window) == (1, 3)
        assert violation.subformula == self.FORMULA

    def test_window_clamped_to_a_short_trace(self):
        monitor = monitor_trace(constraints(self.FORMULA), flags([0, 0]))
        [violation] = monitor.violations
        assert violation.step == 1
        assert "trace ended" not in violation.detail

    def test_trace_ending_inside_the_window(self):
        monitor = monitor_trace(constraints("within[3, 5] exists c in Items: c.ok == 1"), flags([1, 1, 0]))
        [violation] = monitor.violations
        assert violation.step == 2
        assert violation.detail.endswith("the trace ended before the window closed")

    def test_pending_until_decided(self):
        monitor = Monitor(constraints(self.FORMULA))
        monitor.step(flags([0])[0])
        [pending] = monitor.pending
        assert pending.status == ObligationStatus.PENDING
        assert pending.anchor == 0

    def test_known_trace_length_decides_max_windows_early(self):
        trace = flags([0, 0, 0])
        monitor = Monitor(constraints("within[1, MAX] exists c in Items: c.ok == 1"), trace_length=3)
        monitor.step(trace[0])
        monitor.step(trace[1])
        assert monitor.step(trace[2])
        assert monitor.finish() == []

    def test_cancelled_when_a_bound_component_leaves(self):
        trace = [
            snap(0, {"V01": villager(location="Village")}),
            snap(1, {"V01": villager(location="Cave")}),
            snap(2, {}),
            snap(3, {}),
        ]
        monitor = monitor_trace(constraints('forall v in Villagers: within[2, 5] v.location == "Cave"'), trace)
        assert monitor.violations == []
        [note] = monitor.notes
        assert (note.anchor, note.step, note.binding) == (0, 2, (("v", "V01"),))
        assert "cancelled" in note.describe()

    def test_state_violation(self):
        trace = [snap(step, ensembles={"Attack": frozenset(members)})
                 for step, members in enumerate([set(), {"V01", "V02"}, {"V01"}])]
        [violation] = monitor_trace(constraints("count(Attack) <= 1"), trace).violations
        assert (violation.anchor, violation.step) == (1, 1)
        assert violation.detail == "'count(Attack) <= 1' is false"

    def test_implication_anchors_every_step(self):
        trace = [snap(step, ensembles={"Attack": frozenset(a), "Farm": frozenset(f)})
                 for step, (a, f) in enumerate([({"V01"}, set()), ({"V01"}, {"V01"}), (set(), set())])]
        monitor = monitor_trace(constraints("count(Attack) >= 1 implies within[1, 1] count(Farm) >= 1"), trace)
        [violation] = monitor.violations
        assert (violation.anchor, violation.step) == (1, 2)

    def test_backward_window_reads_the_history(self):
        trace = [snap(step, ensembles={"SpawnWarrior": frozenset(ids)})
                 for step, ids in enumerate([set(), set(), set(), {"V01", "V02"}, set()])]
        formula = "within[3, -3] count(SpawnWarrior) < 2 implies count(SpawnWarrior) >= 2"
        monitor = monitor_trace(constraints(formula), trace)
        # steps 0..2 have too little history; step 3 spawns; step 4 sees a spawn in its window
        assert [v.step for v in monitor.violations] == []
        longer = trace + [snap(5, ensembles={"SpawnWarrior": frozenset()}),
                          snap(6, ensembles={"SpawnWarrior": frozenset()}),
                          snap(7, ensembles={"SpawnWarrior": frozenset()})]
        assert [v.step for v in monitor_trace(constraints(formula), longer).violations] == [7]


@given(st.integers(0, 4), st.integers(1, 6), st.integers(0, 5), st.integers(1, 12), st.data())
def test_whole_window_decision_matches_the_replay(n, t, anchor, length, data):
    assume(anchor < length)
    window = ResolvedWindow(n, t)
    steps = window.steps(anchor, length)
    outcomes = data.draw(st.lists(st.one_of(st.none(), st.booleans()),
                                  min_size=len(steps), max_size=len(steps)))
    if None in outcomes:
        outcomes = outcomes[:outcomes.index(None) + 1]
    assert decide_window(window, anchor, length, outcomes) == settle(window, anchor, length, outcomes)


def test_whole_window_decision():
    window = ResolvedWindow(2, 4)
    assert decide_window(window, 0, 10, [False, True, True]).step == 3
    cancelled = decide_window(window, 0, 10, [True, False, None])
    assert (cancelled.status, cancelled.step) == (ObligationStatus.CANCELLED, 3)
    truncated = decide_window(window, 7, 10, [True, False])
    assert (truncated.status, truncated.step, truncated.truncated) == (ObligationStatus.VIOLATED, 9, True)


def spawn_trace(length, spawn_steps):
    return [snap(step, ensembles={"SpawnWarrior": frozenset({"V01", "V02"} if step in spawn_steps else ())})
            for step in range(length)]


@pytest.mark.parametrize("length, spawns, violated", [
    (12, (), [10, 11]),
    (12, (10,), []),
    (17, (5,), [16]),
])
def test_spawn_cadence(cadence_constraints, length, spawns, violated):
    trace = spawn_trace(length, set(spawns))
    online = monitor_trace(list(cadence_constraints), trace)
    assert [v.step for v in online.violations] == violated
    assert verdict_keys(online.violations) == verdict_keys(eval_offline_all(list(cadence_constraints), trace).violations)


# ══════════════════════════════════════════════════════════════
# Stepping errors and subset rejections
# ══════════════════════════════════════════════════════════════

class TestStepping:
    def test_steps_must_be_consecutive(self):
        monitor = Monitor([])
        with pytest.raises(MonitorError):
            monitor.step(snap(1))
        monitor.step(snap(0))
        with pytest.raises(MonitorError):
            monitor.step(snap(0))

    def test_finish_needs_a_snapshot(self):
        with pytest.raises(MonitorError):
            Monitor([]).finish()

    def test_no_steps_after_finish(self):
        monitor = Monitor([])
        monitor.step(snap(0))
        monitor.finish()
        assert monitor.finish() == []
        with pytest.raises(MonitorError):
            monitor.step(snap(1))

    def test_declared_trace_length(self):
        monitor = Monitor([], trace_length=1)
        monitor.step(snap(0))
        with pytest.raises(MonitorError):
            monitor.step(snap(1))
        short = Monitor([], trace_length=2)
        short.step(snap(0))
        with pytest.raises(MonitorError):
            short.finish()


@pytest.mark.parametrize("formula, problem", [
    ("within[1, 3] within[1, 2] count(Attack) >= 1", "nested within"),
    ("within[1, 3] count(Attack) >= 1 or count(Farm) >= 1", "forward within must be"),
    ("count(Attack) >= 1 implies (count(Farm) >= 1 implies count(Farm) >= 2)", "one implication"),
    ("count(Attack) >= 1 implies within[1, -3] count(Farm) >= 1", "backward within is only allowed"),
    ("forall v in Villagers: within[1, -3] v in Attack implies v in Farm", "quantified variables"),
    ("within[MAX, -3] count(Attack) >= 1 implies count(Farm) == 0", "literals or BEG"),
    ("within[1, 5] count(Attack) >= MAX", "MAX as a value"),
])
def test_monitor_rejects_constraints_outside_the_online_subset(formula, problem):
    with pytest.raises(FclLoadError) as info:
        Monitor(constraints(formula))
    assert any(problem in text for text in info.value.problems)


class TestOfflineRouting:
    NESTED = "within[1, MAX] within[1, 2] exists c in Items: c.ok == 1"

    def test_split_keeps_positions(self):
        online, offline = split_online(constraints(TestObligations.FORMULA, self.NESTED, "true"))
        assert [i for i, _ in online] == [0, 2]
        assert [i for i, _ in offline] == [1]

    def test_malformed_constraints_are_still_rejected(self):
        with pytest.raises(FclLoadError):
            split_online([A.Constraint(" ", (), A.Const(True))])

    def test_nested_window_is_checked_offline(self):
        document = constraints(TestObligations.FORMULA, self.NESTED)
        trace = flags([0, 0, 0, 0])
        verifier = verify_trace(document, trace)
        assert sorted({v.constraint_index for v in verifier.violations}) == [0, 1]
        assert verdict_keys(verifier.violations) == verdict_keys(eval_offline_all(document, trace).violations)
        assert verify_trace(document, flags([0, 0, 1, 0])).violations == []

    def test_online_violations_are_reported_as_they_are_decided(self):
        verifier = TraceVerifier(constraints(TestObligations.FORMULA, self.NESTED))
        decided = [verifier.step(snapshot) for snapshot in flags([0, 0, 0, 0])]
        assert [[v.constraint_index for v in found] for found in decided] == [[], [], [], [0]]
        assert [v.constraint_index for v in verifier.finish()] == [1]
        assert verifier.finish() == []

    def test_monitor_keeps_given_indices(self):
        monitor = Monitor(constraints(TestObligations.FORMULA), indices=[5])
        for snapshot in flags([0, 0, 0, 0]):
            monitor.step(snapshot)
        monitor.finish()
        assert [v.constraint_index for v in monitor.violations] == [5]
        with pytest.raises(ValueError):
            Monitor(constraints(TestObligations.FORMULA), indices=[1, 2])


def test_corpus_constraints_load(dragon_constraints, farm_constraints, cadence_constraints):
    for document in (dragon_constraints, farm_constraints, cadence_constraints):
        Monitor(list(document))


# ══════════════════════════════════════════════════════════════
# Online monitor against the offline oracle
# ══════════════════════════════════════════════════════════════

@st.composite
def dragon_traces(draw, max_length=40):
    length = draw(st.integers(1, max_length))
    trace = []
    hp = 50
    for step in range(length):
        present = sorted(draw(st.sets(st.sampled_from(sorted(VILLAGERS)))))
        components = {
            cid: villager(VILLAGERS[cid], draw(st.integers(1, 6)), draw(st.sampled_from(["Village", "Cave"])))
            for cid in present
        }
        hp -= draw(st.integers(0, 8))
        components["D1"] = ComponentState("Dragon", {"hp": hp})
        ensembles = {
            eid: frozenset(draw(st.sets(st.sampled_from(present)))) if present else frozenset()
            for eid in ENSEMBLES
        }
        beyond = {"dragon": {"hp": hp}, "farm": {"wheat": draw(st.integers(0, 30))}}
        trace.append(snap(step, components, ensembles, beyond))
    return trace


COMPONENT_ATOMS = [
    'v.location == "Cave"', "v.hp > 2", "v in Attack", "v in GoToCave", 'v.role == "Warrior"',
    "not v in Farm",
]
CLOSED_ATOMS = [
    "count(Attack) >= 1", "count(Farm) < 2", "dragon.hp <= 30", "farm.wheat > 5",
    'count({ w in Villagers | w.location == "Cave" }) >= 2', "count(SpawnWarrior) == 0",
]
SHAPES = [
    "within[{n}, {t}] {closed}",
    "forall v in Villagers: within[{n}, {t}] {atom}",
    "forall v in Villagers: {atom} implies within[{n}, {t}] {atom2}",
    "forall v in Villagers: ({atom} and MAX > {k}) implies within[{n}, {t}] {atom2}",
    "forall v in Villagers: {atom} implies forall w in Villagers: within[{n}, {t}] w.hp >= v.hp",
    "within[{bn}, {bt}] {closed} implies {closed2}",
    "forall v in Villagers: within[{bn}, {bt}] {closed} implies {atom}",
    "forall v in Villagers: {atom} or {atom2}",
    "forall v in Villagers: {atom} or MAX < {k}",
    "{closed} and BEG > {k} or {closed2}",
]


def fill_shape(choose):
    """Build one formula; choose(options) picks one of the options"""
    n = choose(["0", "1", "2", "3", "MAX", "0.5*MAX", "BEG", "INF"])
    if n == "INF":
        t = choose(["MAX", "INF"])
    else:
        t = choose(["1", "2", "3", "5", "MAX", "INF", "0.5*MAX"])
    return choose(SHAPES).format(
        n=n,
        t=t,
        bn=choose(["0", "1", "2", "3"]),
        bt=choose(["-1", "-2", "-4", "BEG"]),
        k=choose([0, 1, 2, 3, 4]),
        atom=choose(COMPONENT_ATOMS),
        atom2=choose(COMPONENT_ATOMS),
        closed=choose(CLOSED_ATOMS),
        closed2=choose(CLOSED_ATOMS),
    )


@st.composite
def online_formulas(draw):
    return fill_shape(lambda options: draw(st.sampled_from(options)))


def generated_document(count=200):
    formulas = []
    for seed in itertools.count():
        formula = fill_shape(random.Random(seed).choice)
        if formula not in formulas:
            formulas.append(formula)
        if len(formulas) == count:
            return constraints(*formulas)


def assert_agreement(document, trace):
    online = monitor_trace(document, trace)
    offline = eval_offline_all(document, trace)
    assert verdict_keys(online.violations) == verdict_keys(offline.violations)
    assert note_keys(online.notes) == note_keys(offline.notes)
    known_length = monitor_trace(document, trace, trace_length=len(trace))
    assert verdict_keys(known_length.violations) == verdict_keys(offline.violations)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(dragon_traces())
def test_corpus_constraints_match_the_oracle(dragon_constraints, cadence_constraints, trace):
    assert_agreement(list(dragon_constraints) + list(cadence_constraints), trace)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(online_formulas(), min_size=1, max_size=3), dragon_traces())
def test_generated_constraints_match_the_oracle(formulas, trace):
    assert_agreement(constraints(*formulas), trace)


GENERATED = generated_document()


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(dragon_traces())
def test_two_hundred_generated_constraints_match_the_oracle(trace):
    assert len(GENERATED) == 200
    assert_agreement(GENERATED, trace)
