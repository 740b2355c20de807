"""GraphViz DOT output for static models and behavior graphs."""

from __future__ import annotations

import json

from .behavior import BehaviorGraph
from .model import Action, StaticModel, Thimac, join


def _q(text: str) -> str:
    return json.dumps(text)


def _cluster(t: Thimac, prefix: str, depth: int, counter: list[int], out: list[str]) -> None:
    path = join(prefix, t.name)
    pad = "  " * depth
    out.append(f"{pad}subgraph cluster_{counter[0]} {{")
    counter[0] += 1
    out.append(f"{pad}  label={_q(t.name)};")
    for a in t.actions:
        _action(join(path, a.id), a, pad + "  ", out)
    for sub in t.subthimacs:
        _cluster(sub, path, depth + 1, counter, out)
    out.append(f"{pad}}}")


def _action(path: str, a: Action, pad: str, out: list[str]) -> None:
    label = f"{a.kind}\\n{a.id}"
    if a.steps:
        label += "\\n(" + ", ".join(str(s) for s in a.steps) + ")"
    out.append(f"{pad}{_q(path)} [shape=box, label=\"{label}\"];")
    if a.storage is not None:
        store = f"{path}#store"
        out.append(f"{pad}{_q(store)} [shape=cylinder, label={_q(a.storage.id)}];")
        out.append(f"{pad}{_q(path)} -> {_q(store)} [style=dotted, arrowhead=none];")


def model_to_dot(model: StaticModel) -> str:
    """Thimacs become clusters, flows solid edges, triggers dashed edges."""
    out = ["digraph TM {", "  compound=true;"]
    _cluster(model.root, "", 1, [0], out)
    for f in model.flows:
        out.append(f"  {_q(f.source)} -> {_q(f.target)} [label={_q(f.thing_label)}];")
    for t in model.triggers:
        attrs = "style=dashed"
        if t.guard is not None:
            attrs += f", label={_q(str(t.guard))}"
        out.append(f"  {_q(t.source)} -> {_q(t.target)} [{attrs}];")
    out.append("}")
    return "\n".join(out) + "\n"


def behavior_to_dot(graph: BehaviorGraph) -> str:
    out = ["digraph behavior {", "  rankdir=TB;"]
    for n in graph.nodes:
        out.append(f"  {_q(n.id)} [shape=ellipse, label=\"{n.name} #{n.index}\\n[{n.start}, {n.end}]\"];")
    index = {n.id: i for i, n in enumerate(graph.nodes)}
    for a, b in sorted(graph.edges, key=lambda e: (index[e[0]], index[e[1]])):
        out.append(f"  {_q(a)} -> {_q(b)};")
    out.append("}")
    return "\n".join(out) + "\n"
