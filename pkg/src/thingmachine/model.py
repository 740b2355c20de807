"""Static (timeless) TM models: thimacs, generic actions, flows and triggers.

Flow and trigger endpoints are written relative to the thimac that declares
them, e.g. a flow declared in ``CarHire`` between ``Customer.request.transfer``
and ``SalesDesk.request.transfer``. :func:`build_model` resolves them into
absolute dot-separated paths (``CarHire.Customer.request.transfer``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from .guards import Guard


class ActionKind(enum.Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "ActionKind":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown action kind {text!r}") from None


class ModelError(Exception):
    """Base class for structural errors in a static model."""


class DuplicateName(ModelError):
    def __init__(self, path: str):
        super().__init__(f"duplicate name: {path}")
        self.path = path


class DanglingEndpoint(ModelError):
    def __init__(self, edge: "Flow | Trigger", path: str):
        super().__init__(f"dangling path {path!r} in {edge}")
        self.edge = edge
        self.path = path


class NotFound(ModelError, KeyError):
    def __init__(self, path: str):
        super().__init__(f"not found: {path!r}")
        self.path = path

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class Storage:
    id: str
    discipline: str = "fifo"


@dataclass(frozen=True)
class Action:
    id: str
    kind: ActionKind
    label: str = ""
    storage: Optional[Storage] = None
    guard: Optional[Guard] = None
    steps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("action id must be nonempty")
        if self.guard is not None and self.kind is not ActionKind.PROCESS:
            raise ValueError(f"only process actions may carry a guard ({self.kind} {self.id})")
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class Flow:
    source: str
    target: str
    thing_label: str
    steps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    def __str__(self) -> str:
        return f"flow {self.source} -> {self.target} : {self.thing_label}"


@dataclass(frozen=True)
class Trigger:
    source: str
    target: str
    guard: Optional[Guard] = None
    steps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    def __str__(self) -> str:
        return f"trigger {self.source} -> {self.target}"


@dataclass(frozen=True)
class Thimac:
    name: str
    subthimacs: tuple["Thimac", ...] = ()
    actions: tuple[Action, ...] = ()
    flows: tuple[Flow, ...] = ()
    triggers: tuple[Trigger, ...] = ()

    def __post_init__(self) -> None:
        for attr in ("subthimacs", "actions", "flows", "triggers"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))

    @property
    def implicitly_created(self) -> bool:
        """True when the box alone stands for the thimac's being (no Create)."""
        return not any(a.kind is ActionKind.CREATE for a in self.actions)


Element = Union[Thimac, Action]


@dataclass(frozen=True)
class ResolvedFlow:
    """A flow with absolute endpoints and the path of its declaring thimac."""

    id: int
    source: str
    target: str
    thing_label: str
    steps: tuple[int, ...]
    declared_in: str
    decl: Flow


@dataclass(frozen=True)
class ResolvedTrigger:
    id: int
    source: str
    target: str
    guard: Optional[Guard]
    steps: tuple[int, ...]
    declared_in: str
    decl: Trigger


def join(*parts: str) -> str:
    return ".".join(p for p in parts if p)


def parent_path(path: str) -> str:
    return path.rpartition(".")[0]


@dataclass(frozen=True)
class StaticModel:
    root: Thimac
    index: dict[str, Element]
    flows: tuple[ResolvedFlow, ...]
    triggers: tuple[ResolvedTrigger, ...]
    things: dict[str, frozenset[str]] = field(default_factory=dict)

    def resolve(self, path: str) -> Element:
        return resolve(self, path)

    def action(self, path: str) -> Action:
        element = self.resolve(path)
        if not isinstance(element, Action):
            raise NotFound(path)
        return element

    def action_paths(self) -> list[str]:
        return [p for p, e in self.index.items() if isinstance(e, Action)]

    def thimac_of(self, action_path: str) -> str:
        return parent_path(action_path)

    def outgoing_flows(self, action_path: str) -> list[ResolvedFlow]:
        return [f for f in self.flows if f.source == action_path]

    def incoming_flows(self, action_path: str) -> list[ResolvedFlow]:
        return [f for f in self.flows if f.target == action_path]

    def outgoing_triggers(self, action_path: str) -> list[ResolvedTrigger]:
        return [t for t in self.triggers if t.source == action_path]

    def declared_attributes(self) -> frozenset[str]:
        return frozenset().union(*self.things.values()) if self.things else frozenset()


def _walk(thimac: Thimac, prefix: str) -> Iterator[tuple[str, Element, str]]:
    """Yield (path, element, path-of-container) depth first, declaration order."""
    path = join(prefix, thimac.name)
    yield path, thimac, prefix
    for action in thimac.actions:
        yield join(path, action.id), action, path
    for sub in thimac.subthimacs:
        yield from _walk(sub, path)


def _edges(thimac: Thimac, prefix: str) -> Iterator[tuple[str, Flow | Trigger]]:
    path = join(prefix, thimac.name)
    for f in thimac.flows:
        yield path, f
    for t in thimac.triggers:
        yield path, t
    for sub in thimac.subthimacs:
        yield from _edges(sub, path)


def build_model(root: Thimac, things: Optional[dict[str, Iterable[str]]] = None) -> StaticModel:
    """Index every thimac and action and resolve all flow/trigger endpoints.

    Raises DuplicateName when two siblings share a name (thimacs and actions
    share one namespace per container) and DanglingEndpoint when an edge
    refers to a path that does not name an action.
    """
    index: dict[str, Element] = {}
    for path, element, _ in _walk(root, ""):
        if path in index:
            raise DuplicateName(path)
        index[path] = element

    flows: list[ResolvedFlow] = []
    triggers: list[ResolvedTrigger] = []
    for declared_in, edge in _edges(root, ""):
        src = join(declared_in, edge.source)
        dst = join(declared_in, edge.target)
        for p in (src, dst):
            if not isinstance(index.get(p), Action):
                raise DanglingEndpoint(edge, p)
        if isinstance(edge, Flow):
            if src == dst:
                raise ModelError(f"flow source equals target: {src}")
            flows.append(ResolvedFlow(len(flows), src, dst, edge.thing_label, edge.steps, declared_in, edge))
        else:
            triggers.append(ResolvedTrigger(len(triggers), src, dst, edge.guard, edge.steps, declared_in, edge))

    return StaticModel(
        root=root,
        index=index,
        flows=tuple(flows),
        triggers=tuple(triggers),
        things={k: frozenset(v) for k, v in (things or {}).items()},
    )


def resolve(model: StaticModel, path: str) -> Element:
    try:
        return model.index[path]
    except KeyError:
        raise NotFound(path) from None


@dataclass(frozen=True)
class Region:
    """A subdiagram: a set of actions and every edge with both ends inside."""

    actions: frozenset[str]
    flow_ids: frozenset[int]
    trigger_ids: frozenset[int]

    def __contains__(self, action_path: str) -> bool:
        return action_path in self.actions


def make_region(model: StaticModel, action_paths: Sequence[str]) -> Region:
    for p in action_paths:
        model.action(p)
    inside = frozenset(action_paths)
    return Region(
        actions=inside,
        flow_ids=frozenset(f.id for f in model.flows if f.source in inside and f.target in inside),
        trigger_ids=frozenset(t.id for t in model.triggers if t.source in inside and t.target in inside),
    )


def whole_region(model: StaticModel) -> Region:
    return make_region(model, model.action_paths())
