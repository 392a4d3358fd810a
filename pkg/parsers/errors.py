"""Errors raised by the FCDSL and ADSL parsers"""

from typing import Iterable, List, Optional


class DslSyntaxError(Exception):
    """Syntax error with a source position and a one-line hint"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 hint: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.hint = hint
        super().__init__(str(self))

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"line {self.line}"
            if self.column is not None:
                where += f", column {self.column}"
            where += ": "
        text = f"{where}{self.message}"
        if self.hint:
            text += f" ({self.hint})"
        return text


class DslValidationError(Exception):
    """A parsed document is inconsistent with its architecture specification"""

    def __init__(self, problems: Iterable[str]):
        self.problems: List[str] = list(problems)
        super().__init__("; ".join(self.problems))
