"""
Feedback to the LLM after a failed verification, in one of three modes:
all violations, generic violations only, or scenario metrics only.
"""

import logging
from enum import Enum
from statistics import mean
from typing import List, Sequence

import config
from fcl.violations import GENERIC, Violation
from prompts.am_prompts import (
    FEEDBACK_METRICS,
    FEEDBACK_NO_DETAILS,
    FEEDBACK_NOT_RUNNABLE,
    FEEDBACK_VIOLATION_LINE,
    FEEDBACK_VIOLATIONS,
)
from runtime.generic_rules import CODE_VALIDITY
from runtime.report import RunSummary, ViolationReport

logger = logging.getLogger(__name__)


class FeedbackMode(str, Enum):
    GENERIC_FUNCTIONAL = "generic+functional"
    GENERIC_ONLY = "generic-only"
    METRICS_BASELINE = "metrics-baseline"


FEEDBACK_MODES = tuple(mode.value for mode in FeedbackMode)


def _number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.1f}"


def metric_lines(runs: Sequence[RunSummary]) -> List[str]:
    """Aggregated scenario metrics over all runs of a batch"""
    runs = [run for run in runs if run.metrics]
    lines = []
    if any("win" in run.metrics for run in runs):
        rate = mean(run.metrics.get("win", 0) for run in runs) * 100
        lines.append(f"win rate: {rate:.0f}%")
        won = [run.metrics["steps_to_win"] for run in runs if run.metrics.get("steps_to_win") is not None]
        lines.append(f"number of steps to win: {_number(mean(won)) if won else 'n/a'}")
    if any("damage_rate" in run.metrics for run in runs):
        rate = mean(run.metrics.get("damage_rate", 0.0) for run in runs) * 100
        lines.append(f"damage rate: {rate:.1f}%")
    return lines


def _violation_text(violation: Violation) -> str:
    text = violation.describe()
    if violation.initial_state:
        text = f'in the run from initial state "{violation.initial_state}", {text}'
    return FEEDBACK_VIOLATION_LINE.format(text=text)


def format_feedback(report: ViolationReport, mode: FeedbackMode,
                    language: str = config.GENERATION_LANGUAGE, deduplicate: bool = True) -> str:
    """Empty for a valid report; deduplicate keeps the earliest violation per (constraint, binding)"""
    mode = FeedbackMode(mode)
    if report.valid:
        return ""

    if mode == FeedbackMode.METRICS_BASELINE:
        lines = metric_lines(report.runs)
        unloadable = [v for v in report.generic if v.rule == CODE_VALIDITY]
        if unloadable or not lines:
            # the code never ran, so there are no metrics to report
            violations = "\n".join(_violation_text(v) for v in unloadable or report.generic)
            return FEEDBACK_NOT_RUNNABLE.format(violations=violations, language=language)
        return FEEDBACK_METRICS.format(metrics="\n".join(lines), language=language)

    shown = report.deduplicated() if deduplicate else list(report.violations)
    if mode == FeedbackMode.GENERIC_ONLY:
        shown = [v for v in shown if v.kind == GENERIC]
    if not shown:
        return FEEDBACK_NO_DETAILS.format(language=language)
    violations = "\n".join(_violation_text(v) for v in shown)
    return FEEDBACK_VIOLATIONS.format(violations=violations, language=language)
