"""
Adaptation Manager Generator
The feedback loop: prompt the backend, materialize the answer, verify it over
all initial states and send the violations back until an AM passes.
"""

import hashlib
import logging
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from langchain_core.messages import AIMessage, BaseMessage, HumanMessage

import config
from amhost.errors import MaterializeError
from amhost.materialize import materialize_generated_am
from fcl import ast as A
from generators.backends import BackendError, GenBackend
from generators.feedback import FeedbackMode, format_feedback
from generators.prompt_generator import WITH_CONSTRAINTS, conversation_template, generate_prompt
from parsers.adsl import ArchitectureSpec, InitialState
from runtime.adaptation_loop import run_batch
from runtime.generic_rules import CODE_VALIDITY, generic_violation
from runtime.report import ViolationReport
from scenarios import get_scenario

logger = logging.getLogger(__name__)

MAX_ITERATIONS_ABORT = "max-iterations"
TRANSPORT_FAILURE = "transport-failure"


@dataclass
class IterationRecord:
    iteration: int
    message_count: int
    response_digest: str
    report: ViolationReport
    stagnant: bool = False
    notes: List[str] = field(default_factory=list)
    feedback: str = ""

    def to_record(self) -> dict:
        return {
            "iteration": self.iteration,
            "message_count": self.message_count,
            "response_digest": self.response_digest,
            "valid": self.report.valid,
            "violations": len(self.report.violations),
            "stagnant": self.stagnant,
            "notes": list(self.notes),
        }


@dataclass
class LoopResult:
    iterations: int = 0
    valid: bool = False
    records: List[IterationRecord] = field(default_factory=list)
    abort_reason: Optional[str] = None
    final_report: Optional[ViolationReport] = None
    response: str = ""

    @property
    def stagnated(self) -> bool:
        return any(record.stagnant for record in self.records)

    def to_record(self) -> dict:
        return {
            "iterations": self.iterations,
            "valid": self.valid,
            "abort_reason": self.abort_reason,
            "records": [record.to_record() for record in self.records],
        }


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _unloadable_report(error: MaterializeError) -> ViolationReport:
    return ViolationReport([generic_violation(CODE_VALIDITY, 0, f"{error.code}: {error.message}")])


class AmGenerator:
    """Generator for adaptation managers, driven by verification feedback"""

    def __init__(self, backend: GenBackend, spec: ArchitectureSpec, domain_text: str,
                 constraints: Sequence[A.Constraint], work_dir: Optional[str] = None,
                 language: str = config.GENERATION_LANGUAGE, jobs: int = 1):
        """
        Initialize the generator

        Args:
            backend: where the conversation is sent
            spec: architecture specification with am_interface and initial states
            domain_text: natural-language description of the system
            constraints: functional constraints; always used for verification
            work_dir: where generated AMs are written (a temporary directory if None)
            language: language the generated code must be written in
            jobs: parallel runs per verification batch
        """
        if spec.am_interface is None:
            raise ValueError("the architecture specification has no am_interface")
        self.backend = backend
        self.spec = spec
        self.domain_text = domain_text
        self.constraints = list(constraints)
        self.work_dir = work_dir
        self.language = language
        self.jobs = jobs
        self.scenario = get_scenario(spec.scenario)

    def verify(self, response: str, directory: Path,
               initial_states: Optional[Sequence[InitialState]] = None) -> tuple:
        """Materialize one response and run it; returns (report, notes)"""
        try:
            materialized = materialize_generated_am(response, self.spec, directory)
        except MaterializeError as exc:
            logger.info("response is not runnable: %s", exc)
            return _unloadable_report(exc), []
        report, _ = run_batch(self.spec, self.scenario, self.constraints,
                              materialized.endpoint.fresh, initial_states, self.jobs)
        return report, materialized.notes

    def run(self, mode: FeedbackMode = FeedbackMode.GENERIC_FUNCTIONAL,
            variant: str = WITH_CONSTRAINTS, max_iterations: int = config.MAX_ITERATIONS,
            initial_states: Optional[Sequence[InitialState]] = None,
            fresh_start: bool = False, deduplicate: bool = True) -> LoopResult:
        """
        Run the feedback loop until a generated AM passes or max_iterations is reached

        Returns:
            LoopResult with one IterationRecord per backend answer
        """
        if max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        mode = FeedbackMode(mode)
        prompt = generate_prompt(self.spec, self.domain_text, self.constraints, variant, self.language)
        if self.work_dir is None:
            with tempfile.TemporaryDirectory(prefix="am-loop-") as scratch:
                return self._loop(prompt.text, Path(scratch), mode, max_iterations, initial_states,
                                  fresh_start, deduplicate)
        return self._loop(prompt.text, Path(self.work_dir), mode, max_iterations, initial_states,
                          fresh_start, deduplicate)

    def _loop(self, prompt_text: str, work_dir: Path, mode: FeedbackMode, max_iterations: int,
              initial_states: Optional[Sequence[InitialState]], fresh_start: bool,
              deduplicate: bool = True) -> LoopResult:
        work_dir.mkdir(parents=True, exist_ok=True)
        template = conversation_template()
        history: List[BaseMessage] = [HumanMessage(content=prompt_text)]
        result = LoopResult()
        previous = None

        for iteration in range(1, max_iterations + 1):
            messages = template.format_messages(history=history)
            logger.info("iteration %d: sending %d messages to %s", iteration, len(messages), self.backend.name)
            try:
                response = self.backend.complete(messages)
            except BackendError as exc:
                logger.error("backend failed: %s", exc)
                result.abort_reason = TRANSPORT_FAILURE
                return result

            result.iterations = iteration
            result.response = response
            # one directory per loop so identical code gives identical reports
            report, notes = self.verify(response, work_dir / "am", initial_states)
            (work_dir / f"response-{iteration:02d}.md").write_text(response, encoding="utf-8")

            fingerprint = report.dumps()
            record = IterationRecord(iteration, len(messages), _digest(response), report,
                                     stagnant=fingerprint == previous, notes=notes)
            result.records.append(record)
            result.final_report = report
            previous = fingerprint

            if report.valid:
                result.valid = True
                logger.info("iteration %d: the AM passed all constraints", iteration)
                return result

            logger.info("iteration %d: %d violations%s", iteration, len(report.violations),
                        " (same as before)" if record.stagnant else "")
            record.feedback = format_feedback(report, mode, self.language, deduplicate)
            if fresh_start and record.stagnant:
                logger.info("iteration %d: starting the conversation over", iteration)
                history = [HumanMessage(content=prompt_text)]
                previous = None
            else:
                history += [AIMessage(content=response), HumanMessage(content=record.feedback)]

        result.abort_reason = MAX_ITERATIONS_ABORT
        logger.info("no valid AM after %d iterations", max_iterations)
        return result


def run_loop(spec: ArchitectureSpec, domain_text: str, constraints: Sequence[A.Constraint],
             backend: GenBackend, mode: FeedbackMode = FeedbackMode.GENERIC_FUNCTIONAL,
             variant: str = WITH_CONSTRAINTS, max_iterations: int = config.MAX_ITERATIONS,
             initial_states: Optional[Sequence[InitialState]] = None, fresh_start: bool = False,
             work_dir: Optional[str] = None, jobs: int = 1, deduplicate: bool = True) -> LoopResult:
    generator = AmGenerator(backend, spec, domain_text, constraints, work_dir=work_dir, jobs=jobs)
    return generator.run(mode, variant, max_iterations, initial_states, fresh_start, deduplicate)
