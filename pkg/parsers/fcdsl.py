"""
FCDSL: functional constraint files.

    constraint "All farmers should stay in the village."
        let Farmers = { v in Villagers | v.role == "Farmer" }
        forall f in Farmers: within[MAX, MAX] f.location == "Village"

A header at column 0 is followed by indented `let` lines and then the formula,
which may span several indented lines.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from fcl import ast as A
from fcl.render import DOUBLE_QUOTED, SINGLE_QUOTED, render_constraints, unquote
from fcl.subset import well_formedness_problems
from parsers.errors import DslSyntaxError, DslValidationError
from parsers.formula_grammar import parse_formula, parse_setexpr

logger = logging.getLogger(__name__)

_HEADER = re.compile(rf"^constraint\s+(?:{DOUBLE_QUOTED}|{SINGLE_QUOTED})\s*(?:#.*)?$")
_LET = re.compile(r"^(\s+)let\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*")


@dataclass(frozen=True)
class ConstraintDocument:
    """Ordered constraints of one .fcl file"""
    constraints: Tuple[A.Constraint, ...] = ()
    source: Optional[str] = field(default=None, compare=False)

    def __iter__(self) -> Iterator[A.Constraint]:
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __getitem__(self, index: int) -> A.Constraint:
        return self.constraints[index]

    @property
    def descriptions(self) -> List[str]:
        return [c.description for c in self.constraints]

    def render(self) -> str:
        return render_constraints(self.constraints)


def _is_skippable(line: str) -> bool:
    stripped = line.strip()
    return not stripped or stripped.startswith("#")


def _parse_block(header_line: int, description: str, body: List[Tuple[int, str]]) -> A.Constraint:
    lets = []
    formula_lines: List[Tuple[int, str]] = []
    for number, line in body:
        if not formula_lines:
            if _is_skippable(line):
                continue
            match = _LET.match(line)
            if match:
                # keep the prefix as blanks so columns stay true to the file
                text = " " * match.end() + line[match.end():]
                source = parse_setexpr(text, line=number)
                lets.append(A.Let(match.group(2), source, A.Position(number, len(match.group(1)) + 1)))
                continue
        formula_lines.append((number, line))

    while formula_lines and _is_skippable(formula_lines[-1][1]):
        formula_lines.pop()
    if not formula_lines:
        raise DslSyntaxError("constraint has no formula", header_line, 1)
    first = formula_lines[0][0]
    body_formula = parse_formula("\n".join(line for _, line in formula_lines), line=first)
    return A.Constraint(description, tuple(lets), body_formula, A.Position(header_line, 1))


def parse_constraints(text: str, source: Optional[str] = None) -> ConstraintDocument:
    """Parse an .fcl document; raises DslSyntaxError or DslValidationError"""
    blocks: List[Tuple[int, str, List[Tuple[int, str]]]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line[:1].isspace() and not _is_skippable(line):
            match = _HEADER.match(line.rstrip())
            if match is None:
                if line.startswith("constraint"):
                    raise DslSyntaxError("malformed constraint header", number, 1,
                                         hint='expected constraint "<description>"')
                raise DslSyntaxError(f"unexpected {line.split()[0]!r}", number, 1,
                                     hint="expected 'constraint'")
            description = unquote(match.group(1) if match.group(1) is not None else match.group(2))
            if not description.strip():
                raise DslSyntaxError("empty description", number, match.start(1 if match.group(1) is not None else 2))
            blocks.append((number, description, []))
        elif blocks:
            blocks[-1][2].append((number, line))
        elif not _is_skippable(line):
            raise DslSyntaxError("indented line outside a constraint", number, 1,
                                 hint="expected 'constraint'")

    constraints = [_parse_block(*block) for block in blocks]

    problems = []
    for constraint in constraints:
        for problem in well_formedness_problems(constraint):
            problems.append(f"line {constraint.pos.line}: constraint \"{constraint.description}\": {problem}")
    if problems:
        raise DslValidationError(problems)

    logger.debug("parsed %d constraints%s", len(constraints), f" from {source}" if source else "")
    return ConstraintDocument(tuple(constraints), source)


def load_constraints(path: str) -> ConstraintDocument:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_constraints(handle.read(), source=path)
