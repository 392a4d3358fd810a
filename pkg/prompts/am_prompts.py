"""
Adaptation Manager Prompt Templates
Sections of the generation prompt and of the feedback messages
"""

AM_SYSTEM = """You are an experienced software engineer. You write adaptation managers for collective \
adaptive systems: code that periodically assigns the components of a system to groups (ensembles)."""

SECTION_SEPARATOR = "---"

TASK = (
    "Suggest an adaptation manager. The goal is to assign the components into groups. "
    "Note that each component must be assigned to exactly one group. "
    "If a component is supposed to remain in the same group (continue performing the same action), "
    "it must always be explicitly re-assigned to that group."
)

INTERFACE = """The adaptation manager must be written in {language} and it must be a class named \
`{class_name}` derived from this base class (can be imported from `{module}`):
```
{base_class}
```
To perform the group assignments, use the `environment.assign_group(component, group_id)` method. \
The `group_id` must be exactly as listed below."""

ASSIGNMENT_INTRO = (
    "In `{method}`, your goal is to divide the {description} (`components`) into the following groups:"
)
GROUP_LINE = '- A group named "{group}": {description}'
PER_GROUP_LINE = (
    '- A group named "{group} <id>" for every {per}, where <id> is the `id` of the {per}: {description}'
)
GROUP_IDS_NOTE = "The `group_ids` argument is a list of all valid group names."

READ_ONLY_NOTE = (
    "note that the attributes are read-only and they do not update when a component is assigned to a group"
)
ATTRIBUTES_INTRO = "For each component, the following attributes are available ({note}):"
ATTRIBUTE_LINE = "- `{id}`: {name}"
ATTRIBUTE_LINE_DESCRIBED = "- `{id}`: {name} ({description})"

BEYOND_CONTROL_INTRO = (
    "Further, you can access the following beyond-control components, "
    "which are only observable and cannot be assigned to groups."
)
BEYOND_CONTROL_LINE = (
    "{description} (accessible via `environment.{accessor}`) with the following attributes ({note}):"
)

REQUIREMENTS_INTRO = "The adaptation strategy must adhere to the following functional requirements:"
REQUIREMENT_LINE = "- {description}"

CLOSING = (
    "Think step by step. First, reason about the task and analyze the problem. "
    "Then, describe the adaptation manager. After that, write the {language} code for the adaptation manager."
)

# --- Feedback ---

FEEDBACK_VIOLATIONS = """The adaptation manager was tested by running the system and it violated the \
following constraints:
{violations}

Fix the adaptation manager so that it satisfies all the constraints and write its complete {language} code again."""

FEEDBACK_VIOLATION_LINE = "- {text}"

FEEDBACK_NO_DETAILS = """The adaptation manager was tested by running the system and it does not fulfil \
all the requirements yet. Improve the adaptation manager and write its complete {language} code again."""

FEEDBACK_METRICS = """The adaptation manager was tested by running the system with the following results:
{metrics}

Improve the adaptation manager and write its complete {language} code again."""

FEEDBACK_NOT_RUNNABLE = """The adaptation manager could not be run:
{violations}

Fix the problem and write the complete {language} code of the adaptation manager again."""
