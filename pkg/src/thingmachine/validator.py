"""Well-formedness checks for static models.

Legal flows follow the stage order of the machine: inside one thimac a thing
goes transfer -> receive -> process -> release -> transfer, and a creation
feeds process or release. Between thimacs only transfer -> transfer connects.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .dsl import Diagnostic
from .model import ActionKind, StaticModel

K = ActionKind

INTRA = "intra"
INTER = "inter"

# (source kind, target kind, locality); data, not code, so it can be extended
ADJACENCY: frozenset[tuple[ActionKind, ActionKind, str]] = frozenset(
    {
        (K.TRANSFER, K.RECEIVE, INTRA),
        (K.RECEIVE, K.PROCESS, INTRA),
        (K.PROCESS, K.RELEASE, INTRA),
        (K.RELEASE, K.TRANSFER, INTRA),
        (K.CREATE, K.PROCESS, INTRA),
        (K.CREATE, K.RELEASE, INTRA),
        (K.TRANSFER, K.TRANSFER, INTER),
    }
)

TRIGGER_TARGETS = frozenset({K.CREATE, K.RELEASE})
ENTRY_KINDS = frozenset({K.CREATE, K.TRANSFER})


def locality(model: StaticModel, source: str, target: str) -> str:
    return INTRA if model.thimac_of(source) == model.thimac_of(target) else INTER


def is_legal_flow(source: ActionKind, target: ActionKind, where: str, table: Iterable = ADJACENCY) -> bool:
    return (source, target, where) in set(table)


def validate(model: StaticModel, table: frozenset = ADJACENCY) -> list[Diagnostic]:
    """Return error and warning diagnostics; an empty list means a clean model."""
    out: list[Diagnostic] = []
    declared = model.declared_attributes()

    for f in model.flows:
        src, dst = model.action(f.source).kind, model.action(f.target).kind
        where = locality(model, f.source, f.target)
        if (src, dst, where) not in table:
            out.append(
                Diagnostic(
                    "error",
                    f"illegal flow adjacency: {src} -> {dst} ({where}-thimac) {f.source} -> {f.target}",
                    path=f.source,
                )
            )

    for t in model.triggers:
        kind = model.action(t.target).kind
        if kind not in TRIGGER_TARGETS:
            out.append(Diagnostic("error", f"trigger must target create or release, not {kind}: {t.target}", path=t.source))
        if t.guard is not None:
            for attr in sorted(t.guard.attributes() - declared):
                out.append(Diagnostic("error", f"guard references undeclared attribute {attr!r}", path=t.source))

    storage_owner: dict[str, str] = {}
    for path in model.action_paths():
        action = model.action(path)
        if action.guard is not None:
            for attr in sorted(action.guard.attributes() - declared):
                out.append(Diagnostic("error", f"guard references undeclared attribute {attr!r}", path=path))
            if not model.outgoing_flows(path) and not model.outgoing_triggers(path):
                out.append(Diagnostic("warning", "guarded process has no outgoing flow or trigger", path=path))
        if action.storage is not None:
            sid = f"{model.thimac_of(path)}.{action.storage.id}"
            if sid in storage_owner:
                out.append(Diagnostic("error", f"storage {sid} attached to more than one action", path=path))
            storage_owner[sid] = path
        if action.kind is K.RELEASE and not any(
            model.action(f.target).kind is K.TRANSFER for f in model.outgoing_flows(path)
        ):
            out.append(Diagnostic("warning", "release is not followed by a transfer", path=path))
    return out


def check_reachability(model: StaticModel) -> list[Diagnostic]:
    """Warn about actions no token can reach from a create or an injectable transfer."""
    succ: dict[str, list[str]] = {p: [] for p in model.action_paths()}
    for f in model.flows:
        succ[f.source].append(f.target)
    for t in model.triggers:
        succ[t.source].append(t.target)
    seen = {p for p in succ if model.action(p).kind in ENTRY_KINDS}
    queue = deque(sorted(seen))
    while queue:
        for nxt in succ[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return [
        Diagnostic("warning", "action is unreachable from any create or entry transfer", path=p)
        for p in model.action_paths()
        if p not in seen
    ]


def errors(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.is_error]
