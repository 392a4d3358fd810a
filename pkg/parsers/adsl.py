"""
ADSL: architecture specifications and initial states.

Declarations start at column 0 and own the indented lines below them:

    component Villager
      attribute role
        name "Role"
        description "'Farmer' or 'Warrior'"
    ensemble Farm
      name "farm"
      description "Stay in the Village and work on the farm"
    beyond-control Dragon dragon "The Dragon"
    periodically assign Villager[] "Villagers in the Village"
      if location == 'Village'
    into ensembles Farm, GoToCave
    as assign_in_village
    strategy: "All Warriors should go to the Cave ..."
    am_interface SmartAdaptation(dragon.DragonHuntAdaptation)
    initial state "Farmers and Warriors"
      random_seed: 42
      farmer_count: 2

`into ensembles` and `as` continue the preceding assignment even at column 0.
"""

from __future__ import annotations

import dataclasses
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from fcl import ast as A
from fcl.render import DOUBLE_QUOTED, SINGLE_QUOTED, render_formula, render_number, render_string, unquote
from parsers.errors import DslSyntaxError
from parsers.formula_grammar import parse_formula

logger = logging.getLogger(__name__)

IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_STRING = rf"(?:{DOUBLE_QUOTED}|{SINGLE_QUOTED})"
_COMMENT = r"\s*(?:#.*)?$"

_COMPONENT = re.compile(rf"^component\s+({IDENT}){_COMMENT}")
_ENSEMBLE = re.compile(rf"^ensemble\s+({IDENT})(?:\s+per\s+({IDENT}))?{_COMMENT}")
_BEYOND = re.compile(rf"^beyond-control\s+({IDENT})\s+({IDENT})\s+{_STRING}{_COMMENT}")
_ASSIGN = re.compile(rf"^periodically\s+assign\s+({IDENT})\[\]\s+{_STRING}{_COMMENT}")
_INTO = re.compile(rf"^into\s+ensembles\s+({IDENT}(?:\s*,\s*{IDENT})*){_COMMENT}")
_AS = re.compile(rf"^as\s+({IDENT}){_COMMENT}")
_IF = re.compile(r"^if\s+")
_STRATEGY = re.compile(rf"^strategy\s*:?\s*{_STRING}{_COMMENT}")
_AM_INTERFACE = re.compile(rf"^am_interface\s+({IDENT})\(({IDENT})\.({IDENT})\){_COMMENT}")
_INITIAL = re.compile(rf"^initial\s+state\s+{_STRING}{_COMMENT}")
_PROPERTY = re.compile(rf"^(name|description)\s*:?\s*{_STRING}{_COMMENT}")
_COMPONENT_NAME = re.compile(rf"^name\s*:?\s*(?:{_STRING}|({IDENT})){_COMMENT}")
_ATTRIBUTE = re.compile(rf"^attribute\s+({IDENT}){_COMMENT}")
_PARAMETER = re.compile(rf"^({IDENT})\s*:\s*(-?\d+(?:\.\d+)?){_COMMENT}")

DECLARATIONS = (
    "component", "ensemble", "beyond-control", "periodically assign",
    "strategy", "am_interface", "initial state",
)
SEED_PARAMETER = "random_seed"


# ══════════════════════════════════════════════════════════════
# Domain types
# ══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Attribute:
    id: str
    name: str = ""
    description: str = ""


@dataclass(frozen=True)
class ComponentType:
    name: str
    display_name: str = ""
    attributes: Tuple[Attribute, ...] = ()

    @property
    def plural(self) -> str:
        """Name of the FCL set holding all components of this type"""
        return self.name + "s"

    def attribute(self, attribute_id: str) -> Optional[Attribute]:
        return next((a for a in self.attributes if a.id == attribute_id), None)


@dataclass(frozen=True)
class Ensemble:
    """An ensemble; with `per` set it has one instance per component of that type"""
    id: str
    name: str
    description: str = ""
    per: Optional[str] = None

    def instance_id(self, component_id: str) -> str:
        return f"{self.id}:{component_id}"

    def group_id(self, component_id: Optional[str] = None) -> str:
        if self.per is None or component_id is None:
            return self.name
        return f"{self.name} {component_id}"


@dataclass(frozen=True)
class BeyondControl:
    type: str
    accessor: str
    description: str = ""


@dataclass(frozen=True)
class Assignment:
    component_type: str
    description: str
    ensembles: Tuple[str, ...]
    method: str
    filter_text: str = field(default="", compare=False)
    filter: Optional[A.Formula] = None


@dataclass(frozen=True)
class AmInterface:
    class_name: str
    module: str
    base: str


@dataclass(frozen=True)
class InitialState:
    name: str
    seed: int
    parameters: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ArchitectureSpec:
    components: Tuple[ComponentType, ...] = ()
    ensembles: Tuple[Ensemble, ...] = ()
    beyond_control: Tuple[BeyondControl, ...] = ()
    assignments: Tuple[Assignment, ...] = ()
    strategy: str = ""
    am_interface: Optional[AmInterface] = None
    initial_states: Tuple[InitialState, ...] = ()
    source: Optional[str] = field(default=None, compare=False)

    def component(self, name: str) -> Optional[ComponentType]:
        return next((c for c in self.components if c.name == name), None)

    def ensemble(self, ensemble_id: str) -> Optional[Ensemble]:
        return next((e for e in self.ensembles if e.id == ensemble_id), None)

    def assignment(self, method: str) -> Optional[Assignment]:
        return next((a for a in self.assignments if a.method == method), None)

    def initial_state(self, name: str) -> Optional[InitialState]:
        return next((s for s in self.initial_states if s.name == name), None)

    @property
    def scenario(self) -> Optional[str]:
        """Scenario key, taken from the module of the AM base class"""
        return self.am_interface.module if self.am_interface else None


# ══════════════════════════════════════════════════════════════
# Parsing
# ══════════════════════════════════════════════════════════════

def _string(match: re.Match, first_group: int) -> str:
    value = match.group(first_group)
    return unquote(value if value is not None else match.group(first_group + 1))


def _is_skippable(line: str) -> bool:
    stripped = line.strip()
    return not stripped or stripped.startswith("#")


@dataclass
class _Block:
    line: int
    header: str
    body: List[Tuple[int, str]] = field(default_factory=list)


def _scan(text: str) -> List[_Block]:
    blocks: List[_Block] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if _is_skippable(line):
            continue
        if line[:1].isspace():
            if not blocks:
                raise DslSyntaxError("indented line outside a declaration", number, 1,
                                     hint="expected one of " + ", ".join(DECLARATIONS))
            blocks[-1].body.append((number, line))
            continue
        if (_INTO.match(line) or _AS.match(line)) and blocks and blocks[-1].header.startswith("periodically"):
            blocks[-1].body.append((number, line))
            continue
        blocks.append(_Block(number, line.rstrip()))
    return blocks


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


def _unexpected(number: int, line: str, expected: str) -> DslSyntaxError:
    word = line.strip().split()[0]
    return DslSyntaxError(f"unexpected {word!r}", number, _indent(line) + 1, hint=f"expected {expected}")


def _parse_component(block: _Block, match: re.Match) -> ComponentType:
    display_name = ""
    attributes: List[Attribute] = []
    current: Optional[Dict[str, str]] = None
    base_indent = None
    for number, line in block.body:
        stripped = line.strip()
        indent = _indent(line)
        if base_indent is None:
            base_indent = indent
        attribute = _ATTRIBUTE.match(stripped)
        if indent == base_indent:
            if attribute:
                current = {"id": attribute.group(1), "name": "", "description": ""}
                attributes.append(current)
                continue
            named = _COMPONENT_NAME.match(stripped)
            if named:
                display_name = named.group(3) or _string(named, 1)
                continue
            raise _unexpected(number, line, "'attribute' or 'name'")
        prop = _PROPERTY.match(stripped)
        if current is None or prop is None:
            raise _unexpected(number, line, "'name' or 'description' of an attribute")
        current[prop.group(1)] = _string(prop, 2)

    ids = [a["id"] for a in attributes]
    for attribute_id in ids:
        if ids.count(attribute_id) > 1:
            raise DslSyntaxError(f"attribute '{attribute_id}' declared twice in component "
                                 f"'{match.group(1)}'", block.line, 1)
    return ComponentType(
        match.group(1), display_name,
        tuple(Attribute(a["id"], a["name"], a["description"]) for a in attributes),
    )


def _parse_ensemble(block: _Block, match: re.Match) -> Ensemble:
    values = {"name": "", "description": ""}
    for number, line in block.body:
        prop = _PROPERTY.match(line.strip())
        if prop is None:
            raise _unexpected(number, line, "'name' or 'description'")
        values[prop.group(1)] = _string(prop, 2)
    if not values["name"]:
        raise DslSyntaxError(f"ensemble '{match.group(1)}' needs a name (its group id)", block.line, 1)
    return Ensemble(match.group(1), values["name"], values["description"], match.group(2))


def _qualify(node, bound: frozenset = frozenset()):
    """Bare names in an assignment filter refer to attributes of the filtered component"""
    if isinstance(node, A.Var):
        if node.name in bound:
            return node
        return A.Attr(A.Var("self", node.pos), node.name, node.pos)
    if isinstance(node, A.Attr):
        return node
    if isinstance(node, (A.ForAll, A.Exists, A.Comprehension)):
        bound = bound | {node.var}
    changes = {}
    for child_field in dataclasses.fields(node):
        value = getattr(node, child_field.name)
        if child_field.name != "pos" and isinstance(value, A.NODE_TYPES):
            changes[child_field.name] = _qualify(value, bound)
    return dataclasses.replace(node, **changes) if changes else node


def parse_filter(text: str, line: int = 1) -> A.Formula:
    return _qualify(parse_formula(text, line=line))


def _parse_assignment(block: _Block, match: re.Match) -> Assignment:
    filter_text, filter_formula = "", None
    ensembles: Tuple[str, ...] = ()
    method = None
    for number, line in block.body:
        stripped = line.strip()
        if _IF.match(stripped):
            if filter_formula is not None:
                raise DslSyntaxError("assignment has two filters", number, _indent(line) + 1)
            offset = _indent(line) + len(_IF.match(stripped).group(0))
            filter_text = stripped[len(_IF.match(stripped).group(0)):].strip()
            filter_formula = parse_filter(" " * offset + line[offset:], line=number)
            continue
        into = _INTO.match(stripped)
        if into:
            ensembles = tuple(name.strip() for name in into.group(1).split(","))
            continue
        method_match = _AS.match(stripped)
        if method_match:
            method = method_match.group(1)
            continue
        raise _unexpected(number, line, "'if', 'into ensembles' or 'as'")
    if not ensembles:
        raise DslSyntaxError("assignment needs 'into ensembles'", block.line, 1)
    if method is None:
        raise DslSyntaxError("assignment needs 'as <method>'", block.line, 1)
    return Assignment(match.group(1), _string(match, 2), ensembles, method, filter_text, filter_formula)


def _parse_initial_state(block: _Block, match: re.Match) -> InitialState:
    name = _string(match, 1)
    seed = None
    parameters: Dict[str, float] = {}
    for number, line in block.body:
        parameter = _PARAMETER.match(line.strip())
        if parameter is None:
            raise _unexpected(number, line, "'<parameter>: <number>'")
        key, raw = parameter.group(1), parameter.group(2)
        value = float(raw) if "." in raw else int(raw)
        if key == SEED_PARAMETER:
            if not isinstance(value, int):
                raise DslSyntaxError("random_seed must be an integer", number, _indent(line) + 1)
            seed = value
        elif key in parameters:
            raise DslSyntaxError(f"parameter '{key}' given twice", number, _indent(line) + 1)
        else:
            parameters[key] = value
    if seed is None:
        raise DslSyntaxError(f'initial state "{name}": seed required for repeatability',
                             block.line, 1, hint="add 'random_seed: <integer>'")
    return InitialState(name, seed, parameters)


def _parse_blocks(blocks: List[_Block], states_only: bool = False) -> dict:
    parts = {
        "components": [], "ensembles": [], "beyond_control": [], "assignments": [],
        "strategy": "", "am_interface": None, "initial_states": [],
    }
    for block in blocks:
        header = block.header
        initial = _INITIAL.match(header)
        if initial:
            state = _parse_initial_state(block, initial)
            if any(s.name == state.name for s in parts["initial_states"]):
                raise DslSyntaxError(f'initial state "{state.name}" declared twice', block.line, 1)
            parts["initial_states"].append(state)
            continue
        if states_only:
            continue
        if block.body and not header.startswith(("component", "ensemble", "periodically")):
            number, line = block.body[0]
            raise _unexpected(number, line, "a declaration at column 0")

        component = _COMPONENT.match(header)
        ensemble = _ENSEMBLE.match(header)
        beyond = _BEYOND.match(header)
        assign = _ASSIGN.match(header)
        strategy = _STRATEGY.match(header)
        interface = _AM_INTERFACE.match(header)
        if component:
            if any(c.name == component.group(1) for c in parts["components"]):
                raise DslSyntaxError(f"component '{component.group(1)}' declared twice", block.line, 1)
            parts["components"].append(_parse_component(block, component))
        elif ensemble:
            if any(e.id == ensemble.group(1) for e in parts["ensembles"]):
                raise DslSyntaxError(f"duplicate ensemble id '{ensemble.group(1)}'", block.line, 1)
            parts["ensembles"].append(_parse_ensemble(block, ensemble))
        elif beyond:
            parts["beyond_control"].append(BeyondControl(beyond.group(1), beyond.group(2), _string(beyond, 3)))
        elif assign:
            parts["assignments"].append(_parse_assignment(block, assign))
        elif strategy:
            parts["strategy"] = _string(strategy, 1)
        elif interface:
            if parts["am_interface"] is not None:
                raise DslSyntaxError("am_interface declared twice", block.line, 1)
            parts["am_interface"] = AmInterface(interface.group(1), interface.group(2), interface.group(3))
        else:
            keyword = header.split()[0]
            known = any(header.startswith(d) for d in DECLARATIONS)
            raise DslSyntaxError(
                f"malformed '{keyword}' declaration" if known else f"unknown declaration '{keyword}'",
                block.line, 1, hint="expected one of " + ", ".join(DECLARATIONS),
            )
    return parts


def parse_adsl(text: str, source: Optional[str] = None) -> ArchitectureSpec:
    """Parse an architecture specification, initial states included"""
    parts = _parse_blocks(_scan(text))
    spec = ArchitectureSpec(
        components=tuple(parts["components"]),
        ensembles=tuple(parts["ensembles"]),
        beyond_control=tuple(parts["beyond_control"]),
        assignments=tuple(parts["assignments"]),
        strategy=parts["strategy"],
        am_interface=parts["am_interface"],
        initial_states=tuple(parts["initial_states"]),
        source=source,
    )
    logger.debug("parsed ADSL: %d components, %d ensembles, %d assignments",
                 len(spec.components), len(spec.ensembles), len(spec.assignments))
    return spec


def parse_initial_states(text: str) -> List[InitialState]:
    """Parse the `initial state` blocks of a text; other declarations are skipped"""
    return list(_parse_blocks(_scan(text), states_only=True)["initial_states"])


def load_adsl(path: str) -> ArchitectureSpec:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_adsl(handle.read(), source=path)


# ══════════════════════════════════════════════════════════════
# Rendering
# ══════════════════════════════════════════════════════════════

def _unqualify(text: str) -> str:
    return re.sub(r"\bself\.", "", text)


def render_initial_state(state: InitialState) -> str:
    lines = [f"initial state {render_string(state.name)}", f"  {SEED_PARAMETER}: {state.seed}"]
    for key, value in state.parameters.items():
        lines.append(f"  {key}: {render_number(value)}")
    return "\n".join(lines)


def render_adsl(spec: ArchitectureSpec) -> str:
    """Render a spec back to ADSL text; parse_adsl(render_adsl(s)) == s"""
    sections: List[str] = []
    for component in spec.components:
        lines = [f"component {component.name}"]
        if component.display_name:
            lines.append(f"  name {render_string(component.display_name)}")
        for attribute in component.attributes:
            lines.append(f"  attribute {attribute.id}")
            if attribute.name:
                lines.append(f"    name {render_string(attribute.name)}")
            if attribute.description:
                lines.append(f"    description {render_string(attribute.description)}")
        sections.append("\n".join(lines))
    for ensemble in spec.ensembles:
        header = f"ensemble {ensemble.id}" + (f" per {ensemble.per}" if ensemble.per else "")
        lines = [header, f"  name {render_string(ensemble.name)}"]
        if ensemble.description:
            lines.append(f"  description {render_string(ensemble.description)}")
        sections.append("\n".join(lines))
    for beyond in spec.beyond_control:
        sections.append(f"beyond-control {beyond.type} {beyond.accessor} {render_string(beyond.description)}")
    for assignment in spec.assignments:
        lines = [f"periodically assign {assignment.component_type}[] {render_string(assignment.description)}"]
        if assignment.filter is not None:
            lines.append(f"  if {_unqualify(render_formula(assignment.filter))}")
        lines.append(f"into ensembles {', '.join(assignment.ensembles)}")
        lines.append(f"as {assignment.method}")
        sections.append("\n".join(lines))
    if spec.strategy:
        sections.append(f"strategy: {render_string(spec.strategy)}")
    if spec.am_interface:
        am = spec.am_interface
        sections.append(f"am_interface {am.class_name}({am.module}.{am.base})")
    for state in spec.initial_states:
        sections.append(render_initial_state(state))
    return "\n\n".join(sections) + "\n"
