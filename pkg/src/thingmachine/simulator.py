"""Deterministic discrete-event execution of a static model.

Time is an integer tick. Each tick every enabled token moves across exactly one
edge: along a flow to the next action, or through a trigger into a Create
(a new child token) or a Release (one release credit). Within a tick, firings
are ordered by (action path, token id); nothing else is observable.

A trigger whose guard is false does not fire, unless the guard mentions a
fact the scenario schedules to change; then it waits until the guard holds.

Storage semantics: a token arriving at an action that has storage, or at a
Release that some trigger targets, is queued. Each tick the action fires for
the head of its queue, provided it is not trigger-gated or holds a credit.
A Process with two or more incoming flows is a join: it fires once every
incoming flow has a buffered token, consuming one from each.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Optional

from .model import ActionKind, ResolvedTrigger, StaticModel

DEFAULT_MAX_TICKS = 1000
QUIESCENT = "quiescent"
TICK_LIMIT = "tick-limit"
TRACE_HEADER = "# thingmachine trace v1"


class ScenarioEntryInvalid(ValueError):
    pass


@dataclass(frozen=True)
class Injection:
    label: str
    entry: str
    tick: int = 0
    attributes: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    injections: tuple[Injection, ...] = ()
    guard_env: Mapping[str, bool] = field(default_factory=dict)
    # (tick, name, value): from that tick on, name evaluates to value
    guard_schedule: tuple[tuple[int, str, bool], ...] = ()
    max_ticks: int = DEFAULT_MAX_TICKS

    def __post_init__(self) -> None:
        if self.max_ticks < 0:
            raise ValueError("max_ticks must be >= 0")
        object.__setattr__(self, "injections", tuple(self.injections))


@dataclass(frozen=True)
class ThingToken:
    id: int
    thing_label: str
    attributes: Mapping[str, Any]
    parents: tuple[int, ...] = ()


@dataclass(frozen=True, order=True)
class GenericEvent:
    tick: int
    action_path: str
    token_id: int


@dataclass(frozen=True)
class Note:
    tick: int
    action_path: str
    token_id: int
    text: str


@dataclass(frozen=True)
class Trace:
    events: tuple[GenericEvent, ...]
    tokens: Mapping[int, ThingToken]
    reason: str
    final_tick: int
    storages: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    notes: tuple[Note, ...] = ()
    # per event: indices of the events that directly enabled it
    causes: tuple[tuple[int, ...], ...] = ()

    def key(self) -> tuple:
        labels = tuple(self.tokens[e.token_id].thing_label for e in self.events)
        return (self.events, labels, self.notes, self.reason, self.final_tick)

    def created_tick(self, token_id: int) -> int:
        return min(e.tick for e in self.events if e.token_id == token_id)


@dataclass
class _Item:
    token: int
    causes: tuple[int, ...]
    via: Optional[int] = None


class _Run:
    def __init__(self, model: StaticModel, scenario: Scenario):
        self.model = model
        self.scenario = scenario
        self.env: dict[str, bool] = dict(scenario.guard_env)
        self.schedule = sorted(scenario.guard_schedule)
        self.scheduled_names = {name for _, name, _ in self.schedule}
        self.tokens: dict[int, ThingToken] = {}
        self.events: list[GenericEvent] = []
        self.causes: list[tuple[int, ...]] = []
        self.notes: list[Note] = []
        self.arrivals: list[tuple[str, _Item]] = []
        self.queues: dict[str, deque[_Item]] = defaultdict(deque)
        self.joins: dict[str, dict[int, deque[_Item]]] = {}
        self.credits: dict[str, deque[int]] = defaultdict(deque)
        self.deferred: list[tuple[ResolvedTrigger, int, int]] = []

        self.gated = {t.target for t in model.triggers if model.action(t.target).kind is ActionKind.RELEASE}
        self.queued = set(self.gated)
        for path in model.action_paths():
            action = model.action(path)
            incoming = model.incoming_flows(path)
            if action.kind is ActionKind.PROCESS and len(incoming) >= 2:
                self.joins[path] = {f.id: deque() for f in incoming}
            elif action.storage is not None:
                self.queued.add(path)
        self.routes = {
            path: sorted(model.outgoing_flows(path), key=lambda f: (f.target, f.id)) for path in model.action_paths()
        }
        self.triggers = {
            path: sorted(model.outgoing_triggers(path), key=lambda t: (t.target, t.id)) for path in model.action_paths()
        }

        self.pending_injections: dict[int, list[tuple[str, int]]] = defaultdict(list)
        ordered = sorted(enumerate(scenario.injections), key=lambda p: (p[1].tick, p[0]))
        for _, inj in ordered:
            try:
                kind = model.action(inj.entry).kind
            except KeyError:
                raise ScenarioEntryInvalid(f"no such action: {inj.entry}") from None
            if kind not in (ActionKind.CREATE, ActionKind.TRANSFER):
                raise ScenarioEntryInvalid(f"entry {inj.entry} is a {kind} action; expected create or transfer")
            token = self._new_token(inj.label, dict(inj.attributes), ())
            self.pending_injections[inj.tick].append((inj.entry, token))

    # -- helpers ----------------------------------------------------------
    def _new_token(self, label: str, attrs: dict[str, Any], parents: tuple[int, ...]) -> int:
        tid = len(self.tokens) + 1
        self.tokens[tid] = ThingToken(tid, label, MappingProxyType(attrs), parents)
        return tid

    def _facts(self, token: int) -> dict[str, Any]:
        facts = dict(self.tokens[token].attributes)
        facts.update(self.env)
        return facts

    def _created_label(self, create_path: str) -> str:
        routes = self.routes[create_path]
        if routes:
            return routes[0].thing_label
        return self.model.thimac_of(create_path).rpartition(".")[2]

    def _fireable_queues(self) -> list[str]:
        return [p for p in sorted(self.queues) if self.queues[p] and (p not in self.gated or self.credits[p])]

    def _fireable_joins(self) -> list[str]:
        return [p for p in sorted(self.joins) if all(self.joins[p].values())]

    def has_work(self, tick: int) -> bool:
        if self.arrivals or any(t >= tick for t in self.pending_injections):
            return True
        if self._fireable_queues() or self._fireable_joins():
            return True
        return bool(self.deferred) and any(t >= tick for t, _, _ in self.schedule)

    # -- one tick -----------------------------------------------------------
    def _apply_trigger(self, trig: ResolvedTrigger, token: int, cause: int, into: list[tuple[str, _Item]]) -> None:
        target = self.model.action(trig.target)
        if target.kind is ActionKind.CREATE:
            child = self._new_token(self._created_label(trig.target), dict(self.tokens[token].attributes), (token,))
            into.append((trig.target, _Item(child, (cause,))))
        else:
            self.credits[trig.target].append(cause)

    def step(self, tick: int) -> None:
        for t, name, value in self.schedule:
            if t == tick:
                self.env[name] = value
        arrivals = self.arrivals
        self.arrivals = []

        still_deferred = []
        for trig, token, cause in self.deferred:
            if trig.guard is None or trig.guard.evaluate(self._facts(token)):
                self._apply_trigger(trig, token, cause, arrivals)
            else:
                still_deferred.append((trig, token, cause))
        self.deferred = still_deferred

        for entry, token in self.pending_injections.pop(tick, []):
            arrivals.append((entry, _Item(token, ())))

        firings: list[tuple[str, int, tuple[int, ...]]] = []
        for path, item in sorted(arrivals, key=lambda a: (a[0], a[1].token)):
            if path in self.joins:
                self.joins[path][item.via].append(item)  # type: ignore[index]
            elif path in self.queued:
                self.queues[path].append(item)
            else:
                firings.append((path, item.token, item.causes))
        for path in self._fireable_queues():
            item = self.queues[path].popleft()
            causes = item.causes
            if path in self.gated:
                causes = causes + (self.credits[path].popleft(),)
            firings.append((path, item.token, causes))
        for path in self._fireable_joins():
            consumed = [buf.popleft() for _, buf in sorted(self.joins[path].items())]
            shared = tuple(sorted({c for it in consumed for c in it.causes}))
            for it in consumed:
                firings.append((path, it.token, shared))

        firings.sort(key=lambda f: (f[0], f[1]))
        first = len(self.events)
        for path, token, causes in firings:
            self.events.append(GenericEvent(tick, path, token))
            self.causes.append(tuple(sorted(causes)))

        for offset, (path, token, _) in enumerate(firings):
            idx = first + offset
            action = self.model.action(path)
            facts = self._facts(token)
            if action.guard is not None and not action.guard.evaluate(facts):
                self.notes.append(Note(tick, path, token, "guard-false"))
                continue
            label = self.tokens[token].thing_label
            for flow in self.routes[path]:
                if flow.thing_label == label:
                    self.arrivals.append((flow.target, _Item(token, (idx,), flow.id)))
                    break
            for trig in self.triggers[path]:
                if trig.guard is None or trig.guard.evaluate(facts):
                    self._apply_trigger(trig, token, idx, self.arrivals)
                elif trig.guard.attributes() & self.scheduled_names:
                    # may still become true once a scheduled fact changes
                    self.deferred.append((trig, token, idx))

    def run(self) -> Trace:
        tick = 0
        reason = QUIESCENT
        while self.has_work(tick):
            if tick >= self.scenario.max_ticks:
                reason = TICK_LIMIT
                break
            self.step(tick)
            tick += 1
        if reason == QUIESCENT:
            for trig, token, _ in self.deferred:
                self.notes.append(Note(tick, trig.source, token, "trigger-guard-false"))
        storages = {p: tuple(it.token for it in q) for p, q in sorted(self.queues.items()) if q}
        return Trace(
            events=tuple(self.events),
            tokens=MappingProxyType(dict(self.tokens)),
            reason=reason,
            final_tick=tick,
            storages=MappingProxyType(storages),
            notes=tuple(self.notes),
            causes=tuple(self.causes),
        )


def simulate(model: StaticModel, scenario: Scenario) -> Trace:
    return _Run(model, scenario).run()


def replay_check(model: StaticModel, scenario: Scenario, trace: Trace) -> bool:
    """True iff re-simulating reproduces ``trace`` event for event."""
    try:
        return simulate(model, scenario).key() == trace.key()
    except ScenarioEntryInvalid:
        return False


# ---------------------------------------------------------------------------
# text export: one record per line, fields separated by single spaces
#
#   <tick> <action path> <token id> <thing label>
#   note <tick> <action path> <token id> <text>
#   end <reason> tick <final tick>


def format_trace(trace: Trace) -> str:
    lines = [TRACE_HEADER]
    for e in trace.events:
        lines.append(f"{e.tick} {e.action_path} {e.token_id} {trace.tokens[e.token_id].thing_label}")
    for n in trace.notes:
        lines.append(f"note {n.tick} {n.action_path} {n.token_id} {n.text}")
    lines.append(f"end {trace.reason} tick {trace.final_tick}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> Trace:
    """Read back :func:`format_trace` output (events, labels, notes, footer)."""
    events: list[GenericEvent] = []
    tokens: dict[int, ThingToken] = {}
    notes: list[Note] = []
    reason, final_tick = None, None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line or line.startswith("#"):
            continue
        parts = line.split(" ")
        if parts[0] == "end" and len(parts) == 4 and parts[2] == "tick":
            reason, final_tick = parts[1], int(parts[3])
        elif parts[0] == "note" and len(parts) == 5:
            notes.append(Note(int(parts[1]), parts[2], int(parts[3]), parts[4]))
        elif len(parts) == 4:
            tick, path, tid, label = int(parts[0]), parts[1], int(parts[2]), parts[3]
            events.append(GenericEvent(tick, path, tid))
            tokens.setdefault(tid, ThingToken(tid, label, MappingProxyType({})))
        else:
            raise ValueError(f"line {lineno}: malformed trace record {line!r}")
    if reason is None or final_tick is None:
        raise ValueError("trace has no end record")
    return Trace(tuple(events), MappingProxyType(tokens), reason, final_tick, notes=tuple(notes))


def live_tokens(trace: Trace, tick: int) -> Iterable[int]:
    return sorted({e.token_id for e in trace.events if e.tick == tick})
