"""
Adaptation Manager Prompt Generator
Builds the generation prompt from an architecture specification, the domain
description and (optionally) the functional constraints
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

from langchain_core.messages import BaseMessage, HumanMessage
from langchain_core.prompts import ChatPromptTemplate, MessagesPlaceholder

import config
from amhost.materialize import render_base_class
from fcl import ast as A
from parsers.adsl import ArchitectureSpec, Assignment, ComponentType
from prompts.am_prompts import (
    AM_SYSTEM,
    ASSIGNMENT_INTRO,
    ATTRIBUTE_LINE,
    ATTRIBUTE_LINE_DESCRIBED,
    ATTRIBUTES_INTRO,
    BEYOND_CONTROL_INTRO,
    BEYOND_CONTROL_LINE,
    CLOSING,
    GROUP_IDS_NOTE,
    GROUP_LINE,
    INTERFACE,
    PER_GROUP_LINE,
    READ_ONLY_NOTE,
    REQUIREMENT_LINE,
    REQUIREMENTS_INTRO,
    SECTION_SEPARATOR,
    TASK,
)

logger = logging.getLogger(__name__)

WITH_CONSTRAINTS = "with-constraints"
WITHOUT_CONSTRAINTS = "without-constraints"
VARIANTS = (WITH_CONSTRAINTS, WITHOUT_CONSTRAINTS)


@dataclass(frozen=True)
class PromptBundle:
    """The initial conversation of a generation loop"""
    variant: str
    text: str

    def messages(self) -> List[BaseMessage]:
        return conversation_template().format_messages(history=[HumanMessage(content=self.text)])


def conversation_template() -> ChatPromptTemplate:
    """System message followed by the whole conversation so far"""
    return ChatPromptTemplate.from_messages([
        ("system", AM_SYSTEM),
        MessagesPlaceholder("history"),
    ])


def _attribute_lines(component: Optional[ComponentType]) -> List[str]:
    if component is None:
        return []
    lines = []
    for attribute in component.attributes:
        name = attribute.name or attribute.id
        if attribute.description:
            lines.append(ATTRIBUTE_LINE_DESCRIBED.format(id=attribute.id, name=name,
                                                         description=attribute.description))
        else:
            lines.append(ATTRIBUTE_LINE.format(id=attribute.id, name=name))
    return lines


def _assignment_section(spec: ArchitectureSpec, assignment: Assignment) -> str:
    lines = [ASSIGNMENT_INTRO.format(method=assignment.method, description=assignment.description)]
    for ensemble_id in assignment.ensembles:
        ensemble = spec.ensemble(ensemble_id)
        if ensemble.per is None:
            lines.append(GROUP_LINE.format(group=ensemble.name, description=ensemble.description))
        else:
            lines.append(PER_GROUP_LINE.format(group=ensemble.name, per=ensemble.per,
                                               description=ensemble.description))
    lines += ["", GROUP_IDS_NOTE, "", ATTRIBUTES_INTRO.format(note=READ_ONLY_NOTE)]
    lines += _attribute_lines(spec.component(assignment.component_type))
    return "\n".join(lines)


def _beyond_control_section(spec: ArchitectureSpec) -> str:
    lines = [BEYOND_CONTROL_INTRO, ""]
    for beyond in spec.beyond_control:
        lines.append(BEYOND_CONTROL_LINE.format(description=beyond.description or beyond.type,
                                                accessor=beyond.accessor, note=READ_ONLY_NOTE))
        lines += _attribute_lines(spec.component(beyond.type))
    return "\n".join(lines)


def render_prompt(spec: ArchitectureSpec, domain_text: str, constraints: Iterable[A.Constraint] = (),
                  variant: str = WITH_CONSTRAINTS, language: str = config.GENERATION_LANGUAGE) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"unknown prompt variant {variant!r} (known: {', '.join(VARIANTS)})")
    interface = spec.am_interface
    if interface is None:
        raise ValueError("the architecture specification has no am_interface")

    opening = "\n\n".join(part for part in (
        domain_text.strip(),
        TASK,
        INTERFACE.format(language=language, class_name=interface.class_name,
                         module=interface.module, base_class=render_base_class(spec)),
    ) if part)
    sections = [opening]
    sections += [_assignment_section(spec, a) for a in spec.assignments]
    if spec.beyond_control:
        sections.append(_beyond_control_section(spec))

    closing = []
    if spec.strategy.strip():
        closing.append(spec.strategy.strip())
    else:
        logger.warning("the architecture specification has no strategy; the prompt omits it")
    descriptions = [c.description for c in constraints]
    if variant == WITH_CONSTRAINTS and descriptions:
        closing.append("\n".join(
            [REQUIREMENTS_INTRO] + [REQUIREMENT_LINE.format(description=d) for d in descriptions]
        ))
    closing.append(CLOSING.format(language=language))

    return f"\n{SECTION_SEPARATOR}\n".join(sections) + f"\n{SECTION_SEPARATOR}\n" + "\n\n".join(closing) + "\n"


def generate_prompt(spec: ArchitectureSpec, domain_text: str, constraints: Iterable[A.Constraint] = (),
                    variant: str = WITH_CONSTRAINTS,
                    language: str = config.GENERATION_LANGUAGE) -> PromptBundle:
    """
    Generate the initial prompt of the generation loop

    Args:
        spec: architecture specification with assignments and am_interface
        domain_text: natural-language description of the system
        constraints: functional constraints, listed as requirements in the with-constraints variant
        variant: WITH_CONSTRAINTS or WITHOUT_CONSTRAINTS
        language: language the generated code must be written in

    Returns:
        PromptBundle with the rendered text
    """
    return PromptBundle(variant, render_prompt(spec, domain_text, constraints, variant, language))
