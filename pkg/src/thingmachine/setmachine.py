"""Predicate-defined sets as thimacs: member, extension and transformation.

The pure operations (``admit``, ``select``, ``export``, ``intersect``) work on
immutable values. ``compile_to_tm`` produces the same set as an executable TM
model, so admission can be cross-checked through the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence

from .guards import Guard, conjunction
from .model import Action, ActionKind, Flow, Storage, StaticModel, Thimac, Trigger, build_model
from .simulator import Injection, Scenario, Trace, simulate

K = ActionKind
IDENTITY = "id"
MEMBER_LABEL = "member"


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class Member:
    key: str
    attributes: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.key:
            raise ValueError("member identity key must be nonempty")
        object.__setattr__(self, "attributes", MappingProxyType(dict(self.attributes)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Member):
            return NotImplemented
        return self.key == other.key and dict(self.attributes) == dict(other.attributes)

    def __hash__(self) -> int:
        return hash(self.key)


class Extension:
    """An unordered, duplicate-free pile of members keyed by identity."""

    __slots__ = ("_members", "predicate")

    def __init__(self, members: Iterable[Member] = (), predicate: Optional[Guard] = None):
        table: dict[str, Member] = {}
        for m in members:
            table.setdefault(m.key, m)
        self._members = table
        self.predicate = predicate

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[Member]:
        return (self._members[k] for k in sorted(self._members))

    def __contains__(self, item: object) -> bool:
        key = item.key if isinstance(item, Member) else item
        return key in self._members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Extension):
            return NotImplemented
        return self._members == other._members

    def __repr__(self) -> str:
        return f"Extension({sorted(self._members)})"

    def keys(self) -> list[str]:
        return sorted(self._members)

    def get(self, key: str) -> Optional[Member]:
        return self._members.get(key)

    def with_member(self, m: Member) -> "Extension":
        if m.key in self._members:
            return self
        return Extension([*self._members.values(), m], self.predicate)

    def union(self, other: "Extension") -> "Extension":
        return Extension([*self._members.values(), *other._members.values()])

    def difference(self, other: "Extension") -> "Extension":
        return Extension(m for k, m in self._members.items() if k not in other._members)


@dataclass(frozen=True)
class PredicateSet:
    name: str
    predicate: Guard
    extension: Extension = field(default_factory=Extension)

    def __post_init__(self) -> None:
        for m in self.extension:
            if not self.predicate.evaluate(m.attributes):
                raise ValueError(f"member {m.key} does not satisfy the predicate of {self.name}")

    def __contains__(self, item: object) -> bool:
        return item in self.extension


def admit(s: PredicateSet, m: Member) -> PredicateSet:
    if not s.predicate.evaluate(m.attributes) or m.key in s.extension:
        return s
    return PredicateSet(s.name, s.predicate, s.extension.with_member(m))


def admit_all(s: PredicateSet, members: Iterable[Member]) -> PredicateSet:
    for m in members:
        s = admit(s, m)
    return s


def select(s: PredicateSet | Extension, criterion: Optional[Guard] = None) -> Optional[Member]:
    """The least-key member satisfying ``criterion``, or None when there is none."""
    ext = s.extension if isinstance(s, PredicateSet) else s
    for m in ext:
        if criterion is None or criterion.evaluate(m.attributes):
            return m
    return None


def export(s: PredicateSet) -> Extension:
    return Extension(s.extension, s.predicate)


def intersect(extensions: Sequence[Extension]) -> Extension:
    if not extensions:
        raise EmptyInput("intersect needs at least one extension")
    first, *rest = extensions
    kept = [m for m in first if all(m.key in e for e in rest)]
    predicates = [e.predicate for e in extensions]
    predicate = conjunction(predicates) if all(p is not None for p in predicates) else None  # type: ignore[arg-type]
    return Extension(kept, predicate)


# ---------------------------------------------------------------------------
# the set as an executable machine

ROLES = ("Member", "Extension", "Transformation")


def compile_to_tm(s: PredicateSet) -> StaticModel:
    """Wire the set as a thimac with Member, Extension and Transformation parts.

    Numbered steps are carried as annotations: a member is received (1),
    qualified (2) and sent to the transformation (3); the extension can also
    go there (4); insertion (5) yields the new extension (6); the extension
    can go to selection (7, 8) whose pick returns to the member side (9); and
    the whole extension can be exported (10).
    """
    member = Thimac(
        "Member",
        actions=[
            Action("arrive", K.TRANSFER),
            Action("receive", K.RECEIVE, steps=(1,)),
            Action("qualify", K.PROCESS, guard=s.predicate, steps=(2,)),
            Action("release", K.RELEASE),
            Action("depart", K.TRANSFER),
            Action("picked_in", K.TRANSFER),
            Action("picked", K.RECEIVE),
        ],
        flows=[
            Flow("arrive", "receive", MEMBER_LABEL, (1,)),
            Flow("receive", "qualify", MEMBER_LABEL, (2,)),
            Flow("qualify", "release", MEMBER_LABEL),
            Flow("release", "depart", MEMBER_LABEL),
            Flow("picked_in", "picked", MEMBER_LABEL),
        ],
    )
    extension = Thimac(
        "Extension",
        actions=[
            Action("query", K.CREATE),
            Action("arrive", K.TRANSFER, steps=(6,)),
            Action("receive", K.RECEIVE),
            Action("hold", K.PROCESS),
            Action("pile", K.RELEASE, storage=Storage("pile")),
            Action("depart", K.TRANSFER, steps=(4, 7, 10)),
        ],
        flows=[
            Flow("arrive", "receive", MEMBER_LABEL),
            Flow("receive", "hold", MEMBER_LABEL),
            Flow("hold", "pile", MEMBER_LABEL),
            Flow("pile", "depart", MEMBER_LABEL),
        ],
        triggers=[Trigger("query", "pile")],
    )
    transformation = Thimac(
        "Transformation",
        actions=[
            Action("insert_in", K.TRANSFER),
            Action("insert_receive", K.RECEIVE),
            Action("insert", K.PROCESS, steps=(5,)),
            Action("insert_release", K.RELEASE),
            Action("insert_out", K.TRANSFER),
            Action("select_in", K.TRANSFER),
            Action("select_receive", K.RECEIVE),
            Action("select", K.PROCESS, steps=(8,)),
            Action("select_release", K.RELEASE),
            Action("select_out", K.TRANSFER),
        ],
        flows=[
            Flow("insert_in", "insert_receive", MEMBER_LABEL),
            Flow("insert_receive", "insert", MEMBER_LABEL, (5,)),
            Flow("insert", "insert_release", MEMBER_LABEL),
            Flow("insert_release", "insert_out", MEMBER_LABEL),
            Flow("select_in", "select_receive", MEMBER_LABEL),
            Flow("select_receive", "select", MEMBER_LABEL, (8,)),
            Flow("select", "select_release", MEMBER_LABEL),
            Flow("select_release", "select_out", MEMBER_LABEL),
        ],
    )
    root = Thimac(
        s.name,
        subthimacs=[member, extension, transformation],
        actions=[Action("export", K.TRANSFER, steps=(10,))],
        flows=[
            Flow("Member.depart", "Transformation.insert_in", MEMBER_LABEL, (3,)),
            Flow("Extension.depart", "Transformation.insert_in", MEMBER_LABEL, (4,)),
            Flow("Transformation.insert_out", "Extension.arrive", MEMBER_LABEL, (6,)),
            # the (7) and (10) routes leave Extension.depart as well; a pile
            # released by a query re-enters insertion first, which is idempotent
            Flow("Extension.depart", "Transformation.select_in", MEMBER_LABEL, (7,)),
            Flow("Transformation.select_out", "Member.picked_in", MEMBER_LABEL, (9,)),
            Flow("Extension.depart", "export", MEMBER_LABEL, (10,)),
        ],
    )
    return build_model(root, {MEMBER_LABEL: {IDENTITY, *sorted(s.predicate.attributes())}})


def pile_path(model: StaticModel) -> str:
    return f"{model.root.name}.Extension.pile"


def member_scenario(model: StaticModel, members: Iterable[Member], existing: Iterable[Member] = ()) -> Scenario:
    """Inject ``existing`` then ``members`` at the member entry, one per tick."""
    entry = f"{model.root.name}.Member.arrive"
    injections = [
        Injection(MEMBER_LABEL, entry, tick, {**m.attributes, IDENTITY: m.key})
        for tick, m in enumerate([*existing, *members])
    ]
    return Scenario(tuple(injections))


def extension_from_trace(trace: Trace, model: StaticModel) -> Extension:
    """Read the final extension out of the pile storage (first arrival wins)."""
    members = []
    for tid in trace.storages.get(pile_path(model), ()):
        attrs = dict(trace.tokens[tid].attributes)
        key = str(attrs.pop(IDENTITY))
        members.append(Member(key, attrs))
    return Extension(members)


def simulate_admission(s: PredicateSet, members: Sequence[Member]) -> Extension:
    model = compile_to_tm(s)
    trace = simulate(model, member_scenario(model, members, existing=s.extension))
    return extension_from_trace(trace, model)
