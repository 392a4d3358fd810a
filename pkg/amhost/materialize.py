"""
Turns an LLM response into a runnable AM: the last fenced code block is
written next to the generated base-class module and a protocol adapter, and
a subprocess endpoint is returned for it.
"""

from __future__ import annotations

import logging
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from string import Template
from typing import List, Optional

import config
from amhost.endpoint import SubprocessEndpoint
from amhost.errors import NO_CODE_BLOCK, MaterializeError
from parsers.adsl import ArchitectureSpec

logger = logging.getLogger(__name__)

CODE_BLOCK = re.compile(r"^```[ \t]*([\w+#.-]*)[^\n]*\n(.*?)^```[ \t]*$", re.DOTALL | re.MULTILINE)
ADAPTER_TEMPLATE = Path(__file__).with_name("adapter_template.txt")
PACKAGE_ROOT = Path(__file__).resolve().parent.parent

CODE_FILE = "generated_am.py"
ADAPTER_FILE = "am_adapter.py"


@dataclass(frozen=True)
class ExtractedCode:
    code: str
    language: str = ""
    block_count: int = 1

    @property
    def notes(self) -> List[str]:
        if self.block_count > 1:
            return [f"response contained {self.block_count} code blocks, the last one was used"]
        return []


def extract_code(text: str) -> ExtractedCode:
    blocks = CODE_BLOCK.findall(text)
    if not blocks:
        raise MaterializeError(NO_CODE_BLOCK, "the response does not contain a fenced code block")
    language, code = blocks[-1]
    if len(blocks) > 1:
        logger.warning("response contains %d code blocks, using the last one", len(blocks))
    return ExtractedCode(code, language.lower(), len(blocks))


def render_base_class(spec: ArchitectureSpec) -> str:
    """The abstract base class the generated AM derives from, one method per assignment"""
    lines = [f"class {spec.am_interface.base}(abc.ABC):"]
    for assignment in spec.assignments:
        lines += [
            "    @abc.abstractmethod",
            f"    def {assignment.method}(self, components, environment, group_ids, step):",
            "        pass",
        ]
    return "\n".join(lines)


def base_module_source(spec: ArchitectureSpec) -> str:
    return "import abc\n\n\n" + render_base_class(spec) + "\n"


@dataclass
class MaterializedAm:
    directory: Path
    code: ExtractedCode
    endpoint: SubprocessEndpoint
    notes: List[str] = field(default_factory=list)


def write_adapter(spec: ArchitectureSpec, directory: Path) -> Path:
    interface = spec.am_interface
    template = Template(ADAPTER_TEMPLATE.read_text(encoding="utf-8"))
    source = template.substitute(
        package_root=repr(str(PACKAGE_ROOT)),
        base_module_repr=repr(interface.module),
        base_class_repr=repr(interface.base),
        am_class_repr=repr(interface.class_name),
        code_file=repr(str(directory / CODE_FILE)),
    )
    path = directory / ADAPTER_FILE
    path.write_text(source, encoding="utf-8")
    return path


def materialize_generated_am(response_text: str, spec: ArchitectureSpec, scratch_dir: os.PathLike,
                             startup_timeout: float = config.AM_STARTUP_TIMEOUT,
                             call_timeout: float = config.AM_CALL_TIMEOUT,
                             python: Optional[str] = None) -> MaterializedAm:
    """Raises MaterializeError when the response has no code block"""
    if spec.am_interface is None:
        raise ValueError("the architecture specification has no am_interface")
    extracted = extract_code(response_text)
    directory = Path(scratch_dir)
    directory.mkdir(parents=True, exist_ok=True)

    (directory / f"{spec.am_interface.module}.py").write_text(base_module_source(spec), encoding="utf-8")
    (directory / CODE_FILE).write_text(extracted.code, encoding="utf-8")
    adapter = write_adapter(spec, directory)
    logger.debug("materialized %s in %s", spec.am_interface.class_name, directory)

    endpoint = SubprocessEndpoint(
        [python or sys.executable, str(adapter)],
        cwd=str(directory),
        startup_timeout=startup_timeout,
        call_timeout=call_timeout,
        name=f"generated:{spec.am_interface.class_name}",
    )
    return MaterializedAm(directory, extracted, endpoint, extracted.notes)
