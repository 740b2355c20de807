"""Textual syntax for TM models (``.tm``), scenarios (``.scn``) and event files.

Model grammar::

    thing request (available, payment_ok)
    thimac CarHire {
      thimac Customer {
        action create make "customer creates a request" @1
        action release out store
        action process check @2 when available and not late = true
      }
      flow Customer.make -> Customer.out : request @3
      trigger Customer.check -> Customer.make when x >= 2
    }

Paths in ``flow``/``trigger`` are relative to the enclosing thimac.
``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .guards import OPERATORS, And, Compare, Guard, Not, Or, format_literal
from .model import (
    Action,
    ActionKind,
    Flow,
    StaticModel,
    Storage,
    Thimac,
    Trigger,
    build_model,
    join,
)
from .simulator import Injection, Scenario

KEYWORDS = {"thing", "thimac", "action", "flow", "trigger", "store", "when", "and", "or", "not", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<op><=|>=|!=|=|<|>)
  | (?P<step>@[0-9]+)
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?(?:[eE][-+]?[0-9]+)?)
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<path>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<punct>[{}(),:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int  # byte offset
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start after end")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: Optional[SourceSpan] = None
    path: str = ""

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def render(self, origin: str = "") -> str:
        where = origin or self.path
        if self.span is not None:
            where = f"{where}:{self.span}" if where else str(self.span)
        return f"{where}: {self.severity}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.render() for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int  # character offset
    end: int


class _Source:
    def __init__(self, text: str):
        self.text = text
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        self._byte_prefix: list[int] = [0]
        total = 0
        for ch in text:
            total += len(ch.encode("utf-8"))
            self._byte_prefix.append(total)

    def span(self, start: int, end: int) -> SourceSpan:
        line = bisect_right(self._line_starts, start)
        column = start - self._line_starts[line - 1] + 1
        return SourceSpan(line, column, self._byte_prefix[start], self._byte_prefix[end])

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        pos = 0
        while pos < len(self.text):
            m = _TOKEN_RE.match(self.text, pos)
            if m is None:
                raise ParseError([Diagnostic("error", f"unexpected character {self.text[pos]!r}", self.span(pos, pos + 1))])
            kind = m.lastgroup or ""
            if kind not in ("ws", "comment"):
                out.append(Token(kind, m.group(), m.start(), m.end()))
            pos = m.end()
        return out


class _Parser:
    def __init__(self, text: str):
        self.src = _Source(text)
        self.toks = self.src.tokens()
        self.i = 0

    # -- token stream --------------------------------------------------
    @property
    def current(self) -> Optional[Token]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.current
        if tok is None:
            n = len(self.src.text)
            return ParseError([Diagnostic("error", f"{message} (found end of input)", self.src.span(n, n))])
        return ParseError([Diagnostic("error", f"{message} (found {tok.text!r})", self.src.span(tok.start, tok.end))])

    def check(self, text: str) -> bool:
        tok = self.current
        return tok is not None and tok.text == text and tok.kind != "string"

    def accept(self, text: str) -> Optional[Token]:
        if self.check(text):
            self.i += 1
            return self.toks[self.i - 1]
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.current
        if tok is None or tok.kind != kind:
            raise self.error(f"expected {what}")
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.current
        if tok is None or tok.kind != "path" or "." in tok.text or tok.text in KEYWORDS:
            raise self.error(f"expected {what}")
        self.i += 1
        return tok

    def path(self) -> Token:
        tok = self.current
        if tok is None or tok.kind != "path" or tok.text in KEYWORDS:
            raise self.error("expected path")
        self.i += 1
        return tok

    def steps(self) -> tuple[int, ...]:
        out = []
        while self.current is not None and self.current.kind == "step":
            out.append(int(self.current.text[1:]))
            self.i += 1
        return tuple(out)

    # -- guards ----------------------------------------------------------
    def guard(self) -> Guard:
        operands = [self._and()]
        while self.accept("or"):
            operands.append(self._and())
        return operands[0] if len(operands) == 1 else Or(tuple(operands))

    def _and(self) -> Guard:
        operands = [self._atom()]
        while self.accept("and"):
            operands.append(self._atom())
        return operands[0] if len(operands) == 1 else And(tuple(operands))

    def _atom(self) -> Guard:
        if self.accept("not"):
            return Not(self._atom())
        if self.accept("("):
            inner = self.guard()
            self.expect(")")
            return inner
        name = self.ident("attribute name").text
        tok = self.current
        if tok is not None and tok.kind == "op":
            self.i += 1
            return Compare(name, tok.text, self.literal())
        return Compare(name, "=", True)

    def literal(self) -> Any:
        tok = self.current
        if tok is None:
            raise self.error("expected literal")
        if tok.kind == "path" and tok.text in ("true", "false"):
            self.i += 1
            return tok.text == "true"
        if tok.kind == "number":
            self.i += 1
            return float(tok.text) if any(c in tok.text for c in ".eE") else int(tok.text)
        if tok.kind == "string":
            self.i += 1
            return json.loads(tok.text)
        raise self.error("expected literal")

    def at_end(self) -> bool:
        return self.current is None


def parse_guard(text: str) -> Guard:
    p = _Parser(text)
    g = p.guard()
    if not p.at_end():
        raise p.error("unexpected text after guard")
    return g


# ---------------------------------------------------------------------------
# models


@dataclass
class _EdgeSite:
    declared_in: str
    edge: Flow | Trigger
    span: SourceSpan
    source_span: SourceSpan
    target_span: SourceSpan


@dataclass
class _ModelParse:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    names: dict[str, SourceSpan] = field(default_factory=dict)
    actions: set[str] = field(default_factory=set)
    edges: list[_EdgeSite] = field(default_factory=list)


def _parse_thimac(p: _Parser, st: _ModelParse, prefix: str) -> Thimac:
    p.expect("thimac")
    name_tok = p.ident("thimac name")
    path = join(prefix, name_tok.text)
    _declare(p, st, path, name_tok)
    p.expect("{")
    subs: list[Thimac] = []
    actions: list[Action] = []
    flows: list[Flow] = []
    triggers: list[Trigger] = []
    while not p.accept("}"):
        tok = p.current
        if tok is None:
            raise p.error("expected '}'")
        if tok.text == "thimac":
            subs.append(_parse_thimac(p, st, path))
        elif tok.text == "action":
            action = _parse_action(p, st, path)
            if action is not None:
                actions.append(action)
        elif tok.text in ("flow", "trigger"):
            edge = _parse_edge(p, st, path)
            (flows if isinstance(edge, Flow) else triggers).append(edge)
        else:
            raise p.error("expected 'thimac', 'action', 'flow', 'trigger' or '}'")
    return Thimac(name_tok.text, subs, actions, flows, triggers)


def _declare(p: _Parser, st: _ModelParse, path: str, tok: Token) -> None:
    span = p.src.span(tok.start, tok.end)
    if path in st.names:
        st.diagnostics.append(Diagnostic("error", f"duplicate name {path!r}", span, path))
    else:
        st.names[path] = span


def _parse_action(p: _Parser, st: _ModelParse, thimac_path: str) -> Optional[Action]:
    start = p.expect("action")
    kind_tok = p.ident("action kind")
    id_tok = p.ident("action id")
    label = ""
    if p.current is not None and p.current.kind == "string":
        label = json.loads(p.current.text)
        p.i += 1
    storage = None
    if p.accept("store"):
        storage = Storage(id_tok.text)
    steps = p.steps()
    guard = p.guard() if p.accept("when") else None
    path = join(thimac_path, id_tok.text)
    _declare(p, st, path, id_tok)
    st.actions.add(path)
    try:
        kind = ActionKind.parse(kind_tok.text)
    except ValueError as exc:
        st.diagnostics.append(Diagnostic("error", str(exc), p.src.span(kind_tok.start, kind_tok.end), path))
        return None
    end = p.toks[p.i - 1].end
    try:
        return Action(id_tok.text, kind, label, storage, guard, steps)
    except ValueError as exc:
        st.diagnostics.append(Diagnostic("error", str(exc), p.src.span(start.start, end), path))
        return None


def _parse_edge(p: _Parser, st: _ModelParse, thimac_path: str) -> Flow | Trigger:
    start = p.current
    assert start is not None
    is_flow = start.text == "flow"
    p.i += 1
    src = p.path()
    p.expect("->")
    dst = p.path()
    edge: Flow | Trigger
    if is_flow:
        p.expect(":")
        label = p.ident("thing label").text
        edge = Flow(src.text, dst.text, label, p.steps())
    else:
        steps = p.steps()
        guard = p.guard() if p.accept("when") else None
        edge = Trigger(src.text, dst.text, guard, steps)
    end = p.toks[p.i - 1].end
    st.edges.append(
        _EdgeSite(
            thimac_path,
            edge,
            p.src.span(start.start, end),
            p.src.span(src.start, src.end),
            p.src.span(dst.start, dst.end),
        )
    )
    return edge


def parse_model(text: str) -> StaticModel:
    """Parse ``.tm`` text into a built StaticModel; raise ParseError on failure."""
    p = _Parser(text)
    st = _ModelParse()
    things: dict[str, list[str]] = {}
    while p.check("thing"):
        p.i += 1
        label = p.ident("thing label").text
        p.expect("(")
        attrs: list[str] = []
        if not p.check(")"):
            attrs.append(p.ident("attribute name").text)
            while p.accept(","):
                attrs.append(p.ident("attribute name").text)
        p.expect(")")
        things.setdefault(label, []).extend(attrs)
    if not p.check("thimac"):
        raise p.error("expected 'thimac'")
    root = _parse_thimac(p, st, "")
    if not p.at_end():
        raise p.error("expected end of input")

    for site in st.edges:
        for rel, span in ((site.edge.source, site.source_span), (site.edge.target, site.target_span)):
            absolute = join(site.declared_in, rel)
            if absolute not in st.actions:
                st.diagnostics.append(Diagnostic("error", f"dangling path {rel!r}", site.span, absolute))
        if isinstance(site.edge, Flow) and site.edge.source == site.edge.target:
            st.diagnostics.append(Diagnostic("error", "flow source equals target", site.span, site.declared_in))
    if st.diagnostics:
        raise ParseError(st.diagnostics)
    return build_model(root, things)


def _relative(path: str, base: str) -> str:
    assert path.startswith(base + "."), (path, base)
    return path[len(base) + 1 :]


def _steps_text(steps: Iterable[int]) -> str:
    return "".join(f" @{s}" for s in steps)


def _emit_thimac(t: Thimac, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    if not (t.actions or t.subthimacs or t.flows or t.triggers):
        out.append(f"{pad}thimac {t.name} {{ }}")
        return
    out.append(f"{pad}thimac {t.name} {{")
    inner = pad + "  "
    for a in t.actions:
        line = f"{inner}action {a.kind} {a.id}"
        if a.label:
            line += " " + format_literal(a.label)
        if a.storage is not None:
            line += " store"
        line += _steps_text(a.steps)
        if a.guard is not None:
            line += f" when {a.guard}"
        out.append(line)
    for sub in t.subthimacs:
        _emit_thimac(sub, depth + 1, out)
    for f in t.flows:
        out.append(f"{inner}flow {f.source} -> {f.target} : {f.thing_label}{_steps_text(f.steps)}")
    for tr in t.triggers:
        line = f"{inner}trigger {tr.source} -> {tr.target}{_steps_text(tr.steps)}"
        if tr.guard is not None:
            line += f" when {tr.guard}"
        out.append(line)
    out.append(f"{pad}}}")


def serialize_model(model: StaticModel) -> str:
    out: list[str] = []
    for label in sorted(model.things):
        out.append(f"thing {label} ({', '.join(sorted(model.things[label]))})")
    _emit_thimac(model.root, 0, out)
    return "\n".join(out) + "\n"


def structure(model: StaticModel) -> tuple:
    """A comparable digest of everything the text form carries."""
    return (
        model.root,
        tuple(sorted((k, tuple(sorted(v))) for k, v in model.things.items())),
    )


# ---------------------------------------------------------------------------
# scenarios


def _resolve_entry(path: str, model: Optional[StaticModel]) -> Optional[str]:
    if model is None:
        return path
    if path in model.index:
        return path
    rooted = join(model.root.name, path)
    if rooted in model.index:
        return rooted
    return None


def parse_scenario(text: str, model: Optional[StaticModel] = None) -> Scenario:
    """Parse a scenario in ``.scn`` syntax, or its JSON equivalent.

    With a model, entry paths may be given relative to the root thimac and
    are checked to exist.
    """
    if text.lstrip().startswith("{"):
        return _scenario_from_json(text, model)
    p = _Parser(text)
    injections: list[Injection] = []
    env: dict[str, bool] = {}
    schedule: list[tuple[int, str, bool]] = []
    max_ticks: Optional[int] = None
    diagnostics: list[Diagnostic] = []
    while not p.at_end():
        tok = p.current
        assert tok is not None
        if tok.text == "inject":
            p.i += 1
            label = p.ident("thing label").text
            p.expect("at")
            path_tok = p.path()
            tick = 0
            if p.accept("tick"):
                tick = int(p.expect_kind("number", "tick").text)
            attrs: dict[str, Any] = {}
            if p.accept("{"):
                while not p.accept("}"):
                    name = p.ident("attribute name").text
                    p.expect("=")
                    attrs[name] = p.literal()
                    if not p.check("}"):
                        p.expect(",")
            entry = _resolve_entry(path_tok.text, model)
            if entry is None:
                diagnostics.append(
                    Diagnostic("error", f"unknown path {path_tok.text!r}", p.src.span(path_tok.start, path_tok.end))
                )
                continue
            if tick < 0:
                raise p.error("tick must be nonnegative", path_tok)
            injections.append(Injection(label, entry, tick, attrs))
        elif tok.text == "guard":
            p.i += 1
            name = p.ident("guard name").text
            p.expect("=")
            value = p.literal()
            if not isinstance(value, bool):
                raise p.error("guard value must be true or false", p.toks[p.i - 1])
            if p.accept("at"):
                schedule.append((int(p.expect_kind("number", "tick").text), name, value))
            else:
                env[name] = value
        elif tok.text == "limit":
            p.i += 1
            num = p.expect_kind("number", "tick limit")
            max_ticks = int(num.text)
            if max_ticks < 0:
                raise p.error("limit must be nonnegative", num)
        else:
            raise p.error("expected 'inject', 'guard' or 'limit'")
    if diagnostics:
        raise ParseError(diagnostics)
    kwargs: dict[str, Any] = {} if max_ticks is None else {"max_ticks": max_ticks}
    return Scenario(tuple(injections), env, tuple(sorted(schedule)), **kwargs)


def _scenario_from_json(text: str, model: Optional[StaticModel]) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        src = _Source(text)
        pos = min(exc.pos, len(text))
        raise ParseError([Diagnostic("error", exc.msg, src.span(pos, pos))]) from None
    injections = []
    bad = []
    for item in data.get("injections", []):
        entry = _resolve_entry(item["at"], model)
        if entry is None:
            bad.append(Diagnostic("error", f"unknown path {item['at']!r}", _Source(text).span(0, 0)))
            continue
        injections.append(Injection(item["label"], entry, int(item.get("tick", 0)), dict(item.get("attributes", {}))))
    if bad:
        raise ParseError(bad)
    env: dict[str, bool] = {}
    schedule = []
    guards = data.get("guards", {})
    if isinstance(guards, dict):
        env = {k: bool(v) for k, v in guards.items()}
    else:
        for g in guards:
            if "at" in g:
                schedule.append((int(g["at"]), g["name"], bool(g["value"])))
            else:
                env[g["name"]] = bool(g["value"])
    kwargs = {}
    if "max_ticks" in data.get("limits", {}):
        kwargs["max_ticks"] = int(data["limits"]["max_ticks"])
    return Scenario(tuple(injections), env, tuple(sorted(schedule)), **kwargs)


def serialize_scenario(scenario: Scenario) -> str:
    out = []
    for inj in scenario.injections:
        line = f"inject {inj.label} at {inj.entry} tick {inj.tick}"
        if inj.attributes:
            line += " { " + ", ".join(f"{k} = {format_literal(v)}" for k, v in inj.attributes.items()) + " }"
        out.append(line)
    for name, value in scenario.guard_env.items():
        out.append(f"guard {name} = {format_literal(value)}")
    for tick, name, value in scenario.guard_schedule:
        out.append(f"guard {name} = {format_literal(value)} at {tick}")
    out.append(f"limit {scenario.max_ticks}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# event decompositions


def parse_events(text: str, model: Optional[StaticModel] = None) -> dict[str, list[str]]:
    """Parse an events file: ``event <name>`` lines each followed by action paths.

    Returns name -> absolute action paths, in file order.
    """
    events: dict[str, list[str]] = {}
    current: Optional[str] = None
    src = _Source(text)
    offset = 0
    diagnostics = []
    for raw in text.splitlines(keepends=True):
        line = raw.split("#", 1)[0].strip()
        line_start = offset
        offset += len(raw)
        if not line:
            continue
        if line.startswith("event "):
            current = line[len("event ") :].strip()
            if not current or current in events:
                diagnostics.append(Diagnostic("error", f"bad or duplicate event name {current!r}", src.span(line_start, line_start)))
            events[current] = []
            continue
        if current is None:
            diagnostics.append(Diagnostic("error", "path before any 'event' line", src.span(line_start, line_start)))
            continue
        for word in line.split():
            path = _resolve_entry(word, model)
            if path is None:
                diagnostics.append(Diagnostic("error", f"unknown path {word!r}", src.span(line_start, line_start)))
            else:
                events[current].append(path)
    if diagnostics:
        raise ParseError(diagnostics)
    return events
