# FCL package: syntax, offline oracle and online monitor
from fcl.bounds import BoundRole, ResolvedWindow, resolve_bound, resolve_window
from fcl.errors import (
    FclError,
    FclEvaluationError,
    FclLoadError,
    FclTypeError,
    MissingComponentError,
    MonitorError,
    TraceFormatError,
    UnboundVariableError,
    UnknownNameError,
    UnresolvedEndcountError,
)
from fcl.evaluator import Evaluator, Verdict, eval_offline, eval_offline_all, eval_state
from fcl.ltl import LtlOperator, ltl_bridge
from fcl.monitor import Monitor, TraceVerifier, monitor_trace, verify_trace
from fcl.obligations import ObligationStatus, TemporalObligation
from fcl.subset import online_problems, split_online, well_formedness_problems
from fcl.trace import ComponentState, Snapshot, read_trace, write_trace
from fcl.violations import FUNCTIONAL, GENERIC, Note, Violation
