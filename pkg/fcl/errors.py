"""Exceptions raised while loading and evaluating FCL constraints"""

from typing import Iterable, List, Optional


class FclError(Exception):
    """Base class for FCL failures"""


class FclLoadError(FclError):
    """A constraint is not well formed or is outside the online-checkable subset"""

    def __init__(self, problems: Iterable[str]):
        self.problems: List[str] = list(problems)
        super().__init__("; ".join(self.problems))


class FclEvaluationError(FclError):
    """Evaluation failed at a given step; carries the offending name"""

    def __init__(self, message: str, name: str = "", step: Optional[int] = None):
        self.name = name
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"{message}{where}")


class UnboundVariableError(FclEvaluationError):
    pass


class UnknownNameError(FclEvaluationError):
    pass


class FclTypeError(FclEvaluationError):
    pass


class MissingComponentError(FclEvaluationError):
    """A bound component is not part of the snapshot (e.g. it died)"""


class UnresolvedEndcountError(FclError):
    """MAX is needed but the trace length is not known yet"""


class TraceFormatError(FclError):
    pass


class MonitorError(FclError):
    pass
