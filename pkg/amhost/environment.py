"""
What an adaptation manager sees during one call: read-only component views and
the environment used to record group assignments.
"""

from __future__ import annotations

import traceback
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

from amhost.protocol import (
    AmFailure,
    AssignRequest,
    AssignResponse,
    ComponentRecord,
    GroupAssignment,
    merge_assignments,
)


class ComponentView:
    """Attributes of a component as they were when the request was built"""

    __slots__ = ("_id", "_attrs")

    def __init__(self, component_id: str, attrs: Mapping[str, Any]):
        object.__setattr__(self, "_id", component_id)
        object.__setattr__(self, "_attrs", dict(attrs))

    @property
    def id(self) -> str:
        return self._id

    def __getattr__(self, name: str) -> Any:
        try:
            return self._attrs[name]
        except KeyError:
            raise AttributeError(f"component {self._id!r} has no attribute {name!r}") from None

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("component attributes are read-only")

    def __repr__(self) -> str:
        return f"ComponentView({self._id!r}, {self._attrs!r})"

    @classmethod
    def from_record(cls, record: ComponentRecord) -> "ComponentView":
        return cls(record.id, record.attrs)


class BeyondControlView(ComponentView):
    def __repr__(self) -> str:
        return f"BeyondControlView({self._id!r}, {self._attrs!r})"


class Environment:
    """
    Passed to every AM method. Beyond-control components are attributes
    (`environment.dragon.hp`); assign_group() records one assignment.
    Group ids are not checked here, the runtime does that on the response.
    """

    def __init__(self, beyond_control: Mapping[str, Mapping[str, Any]], group_ids: Sequence[str]):
        self._beyond = {name: BeyondControlView(name, attrs) for name, attrs in beyond_control.items()}
        self.group_ids = list(group_ids)
        self._calls: List[Tuple[str, str]] = []

    def __getattr__(self, name: str) -> BeyondControlView:
        beyond = self.__dict__.get("_beyond", {})
        if name in beyond:
            return beyond[name]
        raise AttributeError(f"environment has no beyond-control component {name!r}")

    def assign_group(self, component: Union[ComponentView, str], group_id: str) -> None:
        component_id = component if isinstance(component, str) else component.id
        self._calls.append((component_id, str(group_id)))

    @property
    def assignments(self) -> Dict[str, GroupAssignment]:
        return merge_assignments(self._calls)


def request_views(request: AssignRequest) -> Tuple[List[ComponentView], Environment]:
    return (
        [ComponentView.from_record(c) for c in request.components],
        Environment(request.beyond_control, request.group_ids),
    )


def call_am(am: Any, request: AssignRequest) -> AssignResponse:
    """Run one AM method on a request; exceptions become an error response"""
    components, environment = request_views(request)
    try:
        method = getattr(am, request.method)
        method(components, environment, list(request.group_ids), request.step)
    except Exception as exc:
        return AssignResponse(error=AmFailure(f"{type(exc).__name__}: {exc}", traceback.format_exc()))
    return AssignResponse(assignments=environment.assignments)
