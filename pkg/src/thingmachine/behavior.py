"""Named events over a trace and their chronology DAG.

An occurrence of an event is the set of trace events inside the event's region
that belong to one token lineage (tokens descending from the same injected
token). Precedence between occurrences is causal, never merely temporal: A
precedes B when some event of A lies in the causal past of some event of B
and not the other way round.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .model import Region
from .simulator import GenericEvent, Trace


class CyclicBehavior(ValueError):
    pass


@dataclass(frozen=True)
class EventSpec:
    name: str
    region: Region


@dataclass(frozen=True)
class Occurrence:
    lineage: int
    event_indices: tuple[int, ...]
    start: int
    end: int

    def events(self, trace: Trace) -> list[GenericEvent]:
        return [trace.events[i] for i in self.event_indices]


@dataclass(frozen=True, order=True)
class Node:
    start: int
    end: int
    name: str
    index: int

    @property
    def id(self) -> str:
        return f"{self.name}#{self.index}"


@dataclass
class BehaviorGraph:
    nodes: list[Node]
    edges: set[tuple[str, str]] = field(default_factory=set)
    warnings: list[str] = field(default_factory=list)

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def successors(self) -> dict[str, set[str]]:
        succ: dict[str, set[str]] = {n: set() for n in self.node_ids()}
        for a, b in self.edges:
            succ.setdefault(a, set()).add(b)
            succ.setdefault(b, set())
        return succ

    def node(self, name: str, index: int = 0) -> str:
        return f"{name}#{index}"


def lineage_root(trace: Trace, token_id: int) -> int:
    while trace.tokens[token_id].parents:
        token_id = trace.tokens[token_id].parents[0]
    return token_id


def events_of_region(trace: Trace, region: Region) -> list[Occurrence]:
    """Maximal occurrences of ``region`` in ``trace``, ordered by start tick."""
    groups: dict[int, list[int]] = defaultdict(list)
    for i, e in enumerate(trace.events):
        if e.action_path in region.actions:
            groups[lineage_root(trace, e.token_id)].append(i)
    occurrences = [
        Occurrence(root, tuple(idx), trace.events[idx[0]].tick, trace.events[idx[-1]].tick)
        for root, idx in groups.items()
    ]
    return sorted(occurrences, key=lambda o: (o.start, o.event_indices[0]))


def _causal_ancestors(trace: Trace) -> list[set[int]]:
    """For each event, the set of all strictly earlier events that enable it."""
    anc: list[set[int]] = []
    for i, causes in enumerate(trace.causes):
        acc: set[int] = set()
        for c in causes:
            acc.add(c)
            acc |= anc[c]
        anc.append(acc)
    return anc


def extract_behavior(trace: Trace, specs: Sequence[EventSpec]) -> BehaviorGraph:
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("event names must be unique")
    warnings = []
    for a, b in combinations(specs, 2):
        shared = a.region.actions & b.region.actions
        if shared:
            warnings.append(f"overlapping specs {a.name} and {b.name} share {', '.join(sorted(shared))}")

    members: list[tuple[Node, frozenset[int]]] = []
    for spec in specs:
        for k, occ in enumerate(events_of_region(trace, spec.region)):
            members.append((Node(occ.start, occ.end, spec.name, k), frozenset(occ.event_indices)))
    members.sort(key=lambda m: (m[0].start, min(m[1]), m[0].name, m[0].index))

    anc = _causal_ancestors(trace)
    # past[n]: every event in the causal past of some event of node n
    past = [frozenset().union(*(anc[i] for i in evs)) if evs else frozenset() for _, evs in members]
    order = {m[0].id: pos for pos, m in enumerate(members)}

    relation: set[tuple[str, str]] = set()
    for (i, (na, ea)), (j, (nb, eb)) in combinations(enumerate(members), 2):
        a_before_b = bool(ea & past[j])
        b_before_a = bool(eb & past[i])
        if a_before_b and not b_before_a:
            relation.add((na.id, nb.id))
        elif b_before_a and not a_before_b:
            relation.add((nb.id, na.id))
    # members are sorted by start; keeping only forward edges rules out cycles
    relation = {(a, b) for a, b in relation if order[a] < order[b]}
    nodes = [m[0] for m in members]
    return BehaviorGraph(nodes, transitive_reduction(relation, [n.id for n in nodes]), warnings)


def reachability(succ: Mapping[str, Iterable[str]]) -> dict[str, set[str]]:
    reach: dict[str, set[str]] = {}
    for start in succ:
        seen: set[str] = set()
        stack = list(succ[start])
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(succ.get(n, ()))
        reach[start] = seen
    return reach


def transitive_reduction(edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> set[tuple[str, str]]:
    succ: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
        succ.setdefault(b, set())
    reach = reachability(succ)
    reduced = set()
    for a, targets in succ.items():
        for b in targets:
            if not any(b in reach[c] for c in targets if c != b):
                reduced.add((a, b))
    return reduced


def check_dag(graph: BehaviorGraph) -> bool:
    reach = reachability(graph.successors())
    return all(n not in r for n, r in reach.items())


def is_transitively_reduced(graph: BehaviorGraph) -> bool:
    return transitive_reduction(graph.edges, graph.node_ids()) == set(graph.edges)


def comparable_pairs(graph: BehaviorGraph) -> set[frozenset[str]]:
    reach = reachability(graph.successors())
    return {frozenset((a, b)) for a, r in reach.items() for b in r if a != b}


def parallel_pairs(graph: BehaviorGraph) -> list[tuple[str, str]]:
    """All unordered node pairs with no directed path either way."""
    comparable = comparable_pairs(graph)
    ids = graph.node_ids()
    return [(a, b) for a, b in combinations(ids, 2) if frozenset((a, b)) not in comparable]


def precedes(graph: BehaviorGraph, a: str, b: str) -> bool:
    return b in reachability(graph.successors())[a]


# ---------------------------------------------------------------------------
# listing format
#
#   node <name>#<k> <start> <end>
#   edge <name>#<k> -> <name>#<k>


def format_behavior(graph: BehaviorGraph) -> str:
    lines = [f"node {n.id} {n.start} {n.end}" for n in graph.nodes]
    index = {n.id: pos for pos, n in enumerate(graph.nodes)}
    for a, b in sorted(graph.edges, key=lambda e: (index[e[0]], index[e[1]])):
        lines.append(f"edge {a} -> {b}")
    return "\n".join(lines) + "\n"


def parse_behavior(text: str) -> BehaviorGraph:
    """Load a listing; raises CyclicBehavior if its edges contain a cycle."""
    nodes: list[Node] = []
    edges: set[tuple[str, str]] = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "node" and len(parts) == 4:
            name, _, k = parts[1].rpartition("#")
            nodes.append(Node(int(parts[2]), int(parts[3]), name, int(k)))
        elif parts[0] == "edge" and len(parts) == 4 and parts[2] == "->":
            edges.add((parts[1], parts[3]))
        else:
            raise ValueError(f"line {lineno}: malformed behavior record {line!r}")
    known = {n.id for n in nodes}
    for a, b in edges:
        if a not in known or b not in known:
            raise ValueError(f"edge {a} -> {b} names an unknown node")
    graph = BehaviorGraph(nodes, edges)
    if not check_dag(graph):
        raise CyclicBehavior("behavior listing contains a cycle")
    return graph
