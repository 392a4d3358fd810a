"""
Command line for checking specifications, simulating and verifying adaptation
managers, and running the generation loop.

Exit codes: 0 success (and validity for verify/loop), 1 violations found,
2 usage or input errors.

Example, checking a stored Dragon Hunt trace with both methods:

    python cli.py verify --trace traces/dragon_short_game.jsonl --constraints constraints/dragon.fcl --both
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from typing import List, Optional

import config
from amhost.endpoint import make_endpoint
from fcl import FclError, eval_offline_all, read_trace, split_online, verify_trace, write_trace
from fcl.violations import Violation
from generators.am_generator import run_loop
from generators.backends import make_backend
from generators.experiment import iteration_histogram, plot_histogram, run_experiment, save_table
from generators.feedback import FEEDBACK_MODES, format_feedback
from generators.prompt_generator import VARIANTS, WITH_CONSTRAINTS, generate_prompt
from parsers.adsl import ArchitectureSpec, load_adsl
from parsers.errors import DslSyntaxError, DslValidationError
from parsers.fcdsl import load_constraints
from parsers.validation import cross_validate
from runtime.adaptation_loop import AdaptationLoop
from runtime.report import ViolationReport
from scenarios import SCENARIOS, ScenarioError, get_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2

INPUT_ERRORS = (DslSyntaxError, DslValidationError, FclError, ScenarioError, ValueError, OSError)


# ══════════════════════════════════════════════════════════════
# Corpora
# ══════════════════════════════════════════════════════════════

def _default(path: Optional[str], directory: str, scenario: str, extension: str) -> str:
    return path or os.path.join(directory, f"{scenario}.{extension}")


def _spec(args) -> ArchitectureSpec:
    return load_adsl(_default(args.spec, config.SPECS_DIR, args.scenario, "adsl"))


def _constraints(args):
    return load_constraints(_default(args.constraints, config.CONSTRAINTS_DIR, args.scenario, "fcl"))


def _domain(args) -> str:
    with open(_default(args.domain, config.DOMAINS_DIR, args.scenario, "txt"), encoding="utf-8") as handle:
        return handle.read()


def _emit(args, text: str, record) -> None:
    if args.format == "records":
        print(json.dumps(record, indent=2, sort_keys=True))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


# ══════════════════════════════════════════════════════════════
# Commands
# ══════════════════════════════════════════════════════════════

def cmd_check(args) -> int:
    spec = load_adsl(args.spec)
    constraints = [c for path in args.constraints for c in load_constraints(path)]
    cross_validate(spec, constraints, args.scenario)
    _, offline = split_online(constraints)
    text = f"{args.spec}: ok ({len(constraints)} constraints"
    text += f", {len(offline)} checked offline)" if offline else ")"
    _emit(args, text, {"spec": args.spec, "constraints": len(constraints),
                       "offline": [i for i, _ in offline], "ok": True})
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _spec(args)
    constraints = list(_constraints(args)) if not args.no_constraints else []
    scenario = get_scenario(args.scenario)

    if args.initial_state:
        initial_state = spec.initial_state(args.initial_state)
        if initial_state is None:
            raise ValueError(f"unknown initial state {args.initial_state!r}")
    elif spec.initial_states:
        initial_state = spec.initial_states[0]
    else:
        raise ValueError("the architecture specification has no initial states")
    if args.seed is not None:
        initial_state = dataclasses.replace(initial_state, seed=args.seed)

    endpoint = make_endpoint(args.am, args.scenario)
    result = AdaptationLoop(spec, scenario, constraints, endpoint).run(initial_state)
    if args.trace:
        write_trace(args.trace, result.trace)
    report = result.report()
    if args.report:
        report.save(args.report)
    _emit(args, report.render_text(), report.to_record())
    return EXIT_OK if result.valid else EXIT_VIOLATIONS


def _verdict_keys(violations: List[Violation]) -> List[tuple]:
    return sorted((v.constraint_index, v.anchor, v.binding, v.step) for v in violations)


def cmd_verify(args) -> int:
    constraints = list(load_constraints(args.constraints))
    trace = read_trace(args.trace)

    online = offline = None
    if args.method in ("online", "both"):
        verifier = verify_trace(constraints, trace)
        online = ViolationReport(verifier.violations, verifier.notes)
    if args.method in ("offline", "both"):
        verdict = eval_offline_all(constraints, trace)
        offline = ViolationReport(list(verdict.violations), list(verdict.notes))

    report = online if online is not None else offline
    text = report.render_text()
    record = report.to_record()
    agree = True
    if online is not None and offline is not None:
        agree = _verdict_keys(online.violations) == _verdict_keys(offline.violations)
        text += "oracle agreement\n" if agree else "oracle divergence\n"
        record["agreement"] = agree
        if not agree:
            logger.error("online and offline verdicts differ")
            record["offline"] = offline.to_record()
    _emit(args, text, record)
    return EXIT_OK if agree and report.valid else EXIT_VIOLATIONS


def cmd_prompt(args) -> int:
    spec = _spec(args)
    constraints = _constraints(args)
    bundle = generate_prompt(spec, _domain(args), constraints, args.variant)
    if args.out:
        _write(args.out, bundle.text)
    else:
        print(bundle.text, end="")
    return EXIT_OK


def cmd_loop(args) -> int:
    spec = _spec(args)
    constraints = _constraints(args)
    result = run_loop(spec, _domain(args), constraints, make_backend(args.backend), mode=args.mode,
                      variant=args.variant, max_iterations=args.max_iter, fresh_start=args.fresh_start,
                      work_dir=args.work_dir, jobs=args.jobs, deduplicate=not args.no_dedup)
    if args.out and result.final_report is not None:
        result.final_report.save(args.out)
    verdict = "valid" if result.valid else f"not valid ({result.abort_reason})"
    _emit(args, f"{verdict} after {result.iterations} iterations", result.to_record())
    return EXIT_OK if result.valid else EXIT_VIOLATIONS


def cmd_experiment(args) -> int:
    spec = _spec(args)
    constraints = _constraints(args)
    domain = _domain(args)
    table = run_experiment(spec, domain, constraints, lambda: make_backend(args.backend),
                           modes=args.modes, variants=args.variants, repeats=args.repeats,
                           max_iterations=args.max_iter, jobs=args.jobs)
    if args.out:
        save_table(table, args.out)
    if args.plot:
        plot_histogram(table, args.plot, args.max_iter)
    histogram = iteration_histogram(table, args.max_iter)
    _emit(args, histogram.to_string(), table.to_dict(orient="records"))
    return EXIT_OK


def cmd_report(args) -> int:
    report = ViolationReport.load(args.input)
    if args.render == "text":
        text = report.render_text()
    else:
        kind, _, mode = args.render.partition(":")
        if kind != "feedback" or mode not in FEEDBACK_MODES:
            raise ValueError(f"--render must be text or feedback:<{'|'.join(FEEDBACK_MODES)}>")
        text = format_feedback(report, mode, deduplicate=not args.no_dedup)
    _emit(args, text, report.to_record())
    return EXIT_OK if report.valid else EXIT_VIOLATIONS


# ══════════════════════════════════════════════════════════════
# Arguments
# ══════════════════════════════════════════════════════════════

def _corpus_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=sorted(SCENARIOS), default="dragon")
    parser.add_argument("--spec", help="ADSL file (default: specs/<scenario>.adsl)")
    parser.add_argument("--constraints", help="FCL file (default: constraints/<scenario>.fcl)")
    parser.add_argument("--domain", help="domain description (default: domains/<scenario>.txt)")


def _loop_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", default="http", help="mock:<fixture dir> or http[:<provider>]")
    parser.add_argument("--max-iter", type=int, default=config.MAX_ITERATIONS)
    parser.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcl", description="FCL verification and AM generation harness")
    parser.add_argument("--format", choices=["text", "records"], default="text")
    parser.add_argument("--log-level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="validate a specification and its constraints")
    check.add_argument("spec")
    check.add_argument("constraints", nargs="+")
    check.add_argument("--scenario", choices=sorted(SCENARIOS), default=None)
    check.set_defaults(handler=cmd_check)

    simulate = commands.add_parser("simulate", help="run an AM against a scenario")
    _corpus_arguments(simulate)
    simulate.add_argument("--am", required=True, help="builtin:<name> or cmd:<command line>")
    simulate.add_argument("--initial-state")
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--trace", help="write the trace as JSON lines")
    simulate.add_argument("--report", help="write the violation report as JSON lines")
    simulate.add_argument("--no-constraints", action="store_true")
    simulate.set_defaults(handler=cmd_simulate)

    verify = commands.add_parser("verify", help="verify a stored trace")
    verify.add_argument("--trace", required=True)
    verify.add_argument("--constraints", required=True)
    method = verify.add_mutually_exclusive_group()
    method.add_argument("--online", dest="method", action="store_const", const="online")
    method.add_argument("--offline", dest="method", action="store_const", const="offline")
    method.add_argument("--both", dest="method", action="store_const", const="both")
    verify.set_defaults(handler=cmd_verify, method="online")

    prompt = commands.add_parser("prompt", help="render the generation prompt")
    _corpus_arguments(prompt)
    prompt.add_argument("--variant", choices=VARIANTS, default=WITH_CONSTRAINTS)
    prompt.add_argument("--out")
    prompt.set_defaults(handler=cmd_prompt)

    loop = commands.add_parser("loop", help="generate an AM with verification feedback")
    _corpus_arguments(loop)
    _loop_arguments(loop)
    loop.add_argument("--mode", choices=FEEDBACK_MODES, default=FEEDBACK_MODES[0])
    loop.add_argument("--variant", choices=VARIANTS, default=WITH_CONSTRAINTS)
    loop.add_argument("--fresh-start", action="store_true", help="drop the conversation after stagnation")
    loop.add_argument("--no-dedup", action="store_true", help="repeat every violation in the feedback")
    loop.add_argument("--work-dir", help="keep generated AMs and responses here")
    loop.add_argument("--out", help="write the final violation report as JSON lines")
    loop.set_defaults(handler=cmd_loop)

    experiment = commands.add_parser("experiment", help="repeat the loop over modes and variants")
    _corpus_arguments(experiment)
    _loop_arguments(experiment)
    experiment.add_argument("--repeats", type=int, default=10)
    experiment.add_argument("--modes", nargs="+", choices=FEEDBACK_MODES, default=list(FEEDBACK_MODES))
    experiment.add_argument("--variants", nargs="+", choices=VARIANTS, default=list(VARIANTS))
    experiment.add_argument("--out", help="write the table as CSV")
    experiment.add_argument("--plot", help="write a histogram figure")
    experiment.set_defaults(handler=cmd_experiment)

    report = commands.add_parser("report", help="render a stored violation report")
    report.add_argument("--in", dest="input", required=True)
    report.add_argument("--render", default="text", help="text or feedback:<mode>")
    report.add_argument("--no-dedup", action="store_true", help="repeat every violation in the feedback")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    config.setup_logging(args.log_level)
    try:
        return args.handler(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
