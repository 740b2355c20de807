"""Seeded generators of small legal models and scenarios, for property tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .guards import And, Compare, Guard, Not
from .model import Action, ActionKind, Flow, StaticModel, Storage, Thimac, Trigger, build_model
from .simulator import Injection, Scenario
from .validator import ADJACENCY, ENTRY_KINDS, INTER, INTRA, TRIGGER_TARGETS, is_legal_flow

THINGS = {"a": ("x", "y"), "b": ("x",)}


@dataclass(frozen=True)
class GeneratorConfig:
    max_actions: int = 8
    max_subthimacs: int = 2
    chain_probability: float = 0.7
    flow_probability: float = 0.3
    back_flow_probability: float = 0.1
    trigger_probability: float = 0.15
    guard_probability: float = 0.3
    storage_probability: float = 0.2
    max_ticks: int = 60


def _guard(rng: random.Random) -> Guard:
    g: Guard = Compare(rng.choice(("x", "y")), "=", rng.random() < 0.5)
    if rng.random() < 0.3:
        g = Not(g)
    if rng.random() < 0.2:
        g = And((g, Compare("x", "!=", False)))
    return g


def _label(rng: random.Random) -> str:
    # mostly one label, so routes rarely die on a mismatch
    return "b" if rng.random() < 0.2 else "a"


def random_model(rng: random.Random, config: GeneratorConfig = GeneratorConfig()) -> StaticModel:
    """A model with at most ``config.max_actions`` actions and only legal flows.

    Forward edges follow generation order; back flows are rare so token counts
    stay linear, and triggers only point forward so creation cannot cascade.
    """
    containers = ["", *(f"S{i}" for i in range(rng.randint(0, config.max_subthimacs)))]
    n = rng.randint(1, config.max_actions)
    placed: list[tuple[str, Action]] = []
    chained: set[int] = set()
    for i in range(n):
        kind, container = ActionKind.CREATE, rng.choice(containers)
        if i > 0:
            kind, container = rng.choice(list(ActionKind)), rng.choice(containers)
            prev_container, prev = placed[i - 1]
            options = [
                (k, w)
                for (src, k, w) in sorted(ADJACENCY, key=str)
                if src is prev.kind and (w == INTRA or len(containers) > 1)
            ]
            # mostly extend the previous action along a legal adjacency
            if options and rng.random() < config.chain_probability:
                kind, where = rng.choice(options)
                others = [c for c in containers if c != prev_container]
                container = prev_container if where == INTRA else rng.choice(others)
                chained.add(i)
        guard = _guard(rng) if kind is ActionKind.PROCESS and rng.random() < config.guard_probability else None
        storage = None
        if kind in (ActionKind.PROCESS, ActionKind.RELEASE) and rng.random() < config.storage_probability:
            # the text form names a storage after its action
            storage = Storage(f"{kind}{i}")
        label = rng.choice(("", "", f"step {i}"))
        steps = (i + 1,) if rng.random() < 0.3 else ()
        placed.append((container, Action(f"{kind}{i}", kind, label, storage, guard, steps)))

    def path(i: int) -> str:
        c, a = placed[i]
        return f"{c}.{a.id}" if c else a.id

    flows: list[Flow] = []
    triggers: list[Trigger] = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            (ci, ai), (cj, aj) = placed[i], placed[j]
            where = INTRA if ci == cj else INTER
            if is_legal_flow(ai.kind, aj.kind, where):
                p = config.flow_probability if i < j else config.back_flow_probability
                if j == i + 1 and j in chained:
                    p = 1.0
                if rng.random() < p:
                    flows.append(Flow(path(i), path(j), _label(rng)))
            if i < j and aj.kind in TRIGGER_TARGETS and rng.random() < config.trigger_probability:
                g = _guard(rng) if rng.random() < 0.3 else None
                triggers.append(Trigger(path(i), path(j), g))

    subs = tuple(
        Thimac(c, actions=tuple(a for cc, a in placed if cc == c)) for c in containers[1:]
    )
    root = Thimac(
        "R",
        subthimacs=subs,
        actions=tuple(a for c, a in placed if c == ""),
        flows=tuple(flows),
        triggers=tuple(triggers),
    )
    return build_model(root, THINGS)


def random_scenario(rng: random.Random, model: StaticModel, config: GeneratorConfig = GeneratorConfig()) -> Scenario:
    entries = [p for p in model.action_paths() if model.action(p).kind in ENTRY_KINDS]
    creates = [p for p in entries if model.action(p).kind is ActionKind.CREATE]
    injections = []
    if entries:
        for _ in range(rng.randint(1, 3)):
            attrs = {"x": rng.random() < 0.5, "y": rng.random() < 0.5}
            injections.append(
                Injection(_label(rng), rng.choice(creates or entries), rng.randint(0, 3), attrs)
            )
    env = {"x": True} if rng.random() < 0.3 else {}
    return Scenario(tuple(injections), env, max_ticks=config.max_ticks)
