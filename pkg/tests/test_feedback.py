from fcl.violations import FUNCTIONAL, Violation
from generators.feedback import FeedbackMode, format_feedback, metric_lines
from runtime.generic_rules import CODE_VALIDITY, EXACTLY_ONE_ENSEMBLE, generic_violation
from runtime.report import RunSummary, ViolationReport

ATTACK = "The Dragon should be attacked at least once in the first 15 steps of the game."


def functional(step=15, state="Farmers and Warriors"):
    return Violation(constraint=ATTACK, kind=FUNCTIONAL, step=step, detail="", anchor=0,
                     constraint_index=1, initial_state=state)


def runs(*wins):
    return [RunSummary(f"s{i}", i, "win" if won else "lose", 30,
                       {"win": int(won), "steps_to_win": 20 if won else None})
            for i, won in enumerate(wins)]


def test_valid_report_needs_no_feedback():
    for mode in FeedbackMode:
        assert format_feedback(ViolationReport(), mode) == ""


def test_all_violations():
    report = ViolationReport([functional(), functional(16),
                              generic_violation(EXACTLY_ONE_ENSEMBLE, 2, "twice", "V01")])
    text = format_feedback(report, FeedbackMode.GENERIC_FUNCTIONAL)
    lines = [line for line in text.splitlines() if line.startswith("- ")]
    assert lines[0] == f'- in the run from initial state "Farmers and Warriors", step 15: {ATTACK}'
    assert lines[1].startswith("- step 2: [exactly-one-ensemble]")
    # the same obligation is reported once
    assert len(lines) == 2
    assert "write its complete Python code again" in text


def test_generic_only_hides_functional_violations():
    report = ViolationReport([functional(), generic_violation(EXACTLY_ONE_ENSEMBLE, 2, "twice", "V01")])
    text = format_feedback(report, "generic-only")
    assert ATTACK not in text
    assert "[exactly-one-ensemble]" in text


def test_generic_only_without_generic_violations():
    text = format_feedback(ViolationReport([functional()]), FeedbackMode.GENERIC_ONLY)
    assert "does not fulfil all the requirements" in text
    assert ATTACK not in text


def test_metrics():
    report = ViolationReport([functional()], runs=runs(True, False))
    text = format_feedback(report, FeedbackMode.METRICS_BASELINE)
    assert "win rate: 50%" in text
    assert "number of steps to win: 20" in text
    assert ATTACK not in text


def test_metrics_when_the_code_never_ran():
    report = ViolationReport([generic_violation(CODE_VALIDITY, 0, "no-code-block: no code")])
    text = format_feedback(report, FeedbackMode.METRICS_BASELINE)
    assert text.startswith("The adaptation manager could not be run:")
    assert "[code-validity]" in text


def test_metric_lines():
    assert metric_lines(runs(True, True, False, False)) == ["win rate: 50%", "number of steps to win: 20"]
    assert metric_lines(runs(False)) == ["win rate: 0%", "number of steps to win: n/a"]
    farm = [RunSummary("s", 1, "horizon", 200, {"damage_rate": 0.05})]
    assert metric_lines(farm) == ["damage rate: 5.0%"]
