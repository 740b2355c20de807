"""Shipped example systems: car hire and the chalet market.

Data files live next to this package in ``data/`` (also reachable as the
repository's ``corpus/`` directory).
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .behavior import BehaviorGraph, EventSpec, precedes, reachability
from .dsl import parse_events, parse_model, parse_scenario
from .guards import is_true
from .model import StaticModel, make_region
from .setmachine import Extension, Member, PredicateSet, admit, export, intersect
from .simulator import Scenario

DATA = Path(__file__).with_name("data")

# "in green surroundings" and the repair states are spelled as identifiers
DEFAULT_PARAMETERS: tuple[str, ...] = (
    "expensive",
    "beautiful",
    "wooden",
    "cheap",
    "green_surroundings",
    "modern",
    "good_repair",
    "bad_repair",
)


class CatalogError(ValueError):
    pass


class MissingColumn(CatalogError):
    def __init__(self, column: str):
        super().__init__(f"catalog is missing column {column!r}")
        self.column = column


class BadBoolean(CatalogError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}, column {column!r}: not a boolean: {value!r}")
        self.row = row
        self.column = column


class UnknownParameter(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown parameter {name!r}")
        self.name = name


def path(name: str) -> Path:
    return DATA / name


def read(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# chalet catalog


@dataclass(frozen=True)
class ChaletRecord:
    key: str
    features: Mapping[str, bool]

    def member(self) -> Member:
        return Member(self.key, dict(self.features))


@dataclass(frozen=True)
class BuyerRequest:
    wants: frozenset[str]

    def __init__(self, wants: Iterable[str], parameters: Sequence[str] = DEFAULT_PARAMETERS):
        wants = frozenset(wants)
        if not wants:
            raise ValueError("a buyer request names at least one parameter")
        for w in sorted(wants):
            if w not in parameters:
                raise UnknownParameter(w)
        object.__setattr__(self, "wants", wants)


_TRUE = {"true", "1"}
_FALSE = {"false", "0"}


def load_catalog(source: Union[str, Path, io.TextIOBase], parameters: Sequence[str] = DEFAULT_PARAMETERS) -> list[ChaletRecord]:
    """Read ``id,<parameter>...`` rows; booleans are true/false/1/0."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_catalog(fh, parameters)
    reader = csv.DictReader(source)
    header = reader.fieldnames or []
    for column in ("id", *parameters):
        if column not in header:
            raise MissingColumn(column)
    records = []
    for row_no, row in enumerate(reader, start=1):
        features = {}
        for p in parameters:
            raw = (row[p] or "").strip().lower()
            if raw in _TRUE:
                features[p] = True
            elif raw in _FALSE:
                features[p] = False
            else:
                raise BadBoolean(row_no, p, row[p])
        records.append(ChaletRecord(row["id"].strip(), features))
    return records


def write_catalog(records: Iterable[ChaletRecord], parameters: Sequence[str] = DEFAULT_PARAMETERS) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", *parameters])
    for r in records:
        writer.writerow([r.key, *("true" if r.features[p] else "false" for p in parameters)])
    return out.getvalue()


def random_catalog(rng: random.Random, size: int, parameters: Sequence[str] = DEFAULT_PARAMETERS) -> list[ChaletRecord]:
    return [ChaletRecord(f"c{i:02d}", {p: rng.random() < 0.5 for p in parameters}) for i in range(1, size + 1)]


# ---------------------------------------------------------------------------
# chalet pipeline


def parameter_sets(catalog: Sequence[ChaletRecord], parameters: Sequence[str] = DEFAULT_PARAMETERS) -> dict[str, PredicateSet]:
    """Each input chalet is added to the set of every parameter it has."""
    sets = {p: PredicateSet(p, is_true(p)) for p in parameters}
    for record in catalog:
        m = record.member()
        for p in parameters:
            sets[p] = admit(sets[p], m)
    return sets


def run_chalet_pipeline(
    catalog: Sequence[ChaletRecord],
    request: Union[BuyerRequest, Iterable[str]],
    parameters: Sequence[str] = DEFAULT_PARAMETERS,
) -> Extension:
    if not isinstance(request, BuyerRequest):
        request = BuyerRequest(request, parameters)
    for w in sorted(request.wants):
        if w not in parameters:
            raise UnknownParameter(w)
    sets = parameter_sets(catalog, parameters)
    retrieved = [export(sets[p]) for p in parameters if p in request.wants]
    return intersect(retrieved)


# ---------------------------------------------------------------------------
# chalet market as a TM model


def chalet_model_text(parameters: Sequence[str] = DEFAULT_PARAMETERS) -> str:
    """Generate the chalet-market model for a parameter list.

    The first parameter's set carries the detailed step numbers; the next six
    carry 8-13 (insertion) and 18-23 (retrieval); further sets are unnumbered.
    """
    lines = [
        "# Chalet market: chalets are filed into one set per parameter; a buyer",
        "# request retrieves the sets it names and their intersection is returned.",
        "# Generated by thingmachine.corpus.chalet_model_text; do not edit by hand.",
        f"thing chalet (id, {', '.join(parameters)})",
        f"thing request ({', '.join('want_' + p for p in parameters)})",
        "thimac ChaletMarket {",
        "  thimac Seller {",
        '    action create chalet "a chalet with its description"',
        "    action release release",
        "    action transfer transfer",
        "    flow chalet -> release : chalet",
        "    flow release -> transfer : chalet",
        "  }",
        "  thimac Intake {",
        "    action transfer transfer",
        '    action receive receive "chalet input" @1',
        '    action process classify "chalet description examined" @2',
        "    flow transfer -> receive : chalet",
        "    flow receive -> classify : chalet",
        "  }",
    ]
    for i, p in enumerate(parameters):
        if i == 0:
            item, insert, ext = " @6", " @7", " @5 @17"
        elif i <= 6:
            item, insert, ext = "", f" @{7 + i}", f" @{17 + i}"
        else:
            item = insert = ext = ""
        lines += [
            f"  thimac {p}_set {{",
            f'    action create item "single item"{item}',
            f'    action process insert "insert the item into the set"{insert}',
            f'    action release ext "extension" store{ext}',
            "    action transfer transfer",
            "    flow item -> insert : chalet",
            "    flow insert -> ext : chalet",
            "    flow ext -> transfer : chalet",
            "  }",
        ]
    lines += [
        "  thimac Buyer {",
        '    action create request "buyer request" @14',
        "    action release release",
        "    action transfer transfer",
        "    action transfer result_in",
        '    action receive result "chalets reach the buyer" @26',
        "    flow request -> release : request",
        "    flow release -> transfer : request",
        "    flow result_in -> result : chalet",
        "  }",
        "  thimac Broker {",
        "    action transfer request_in",
        "    action receive request_receive",
        '    action process examine "request processed" @15',
        "    action transfer set_in",
        "    action receive set_receive",
        '    action process intersect "retrieved sets processed" @24',
        '    action release release "chalets meeting every requirement" @25',
        "    action transfer transfer",
        "    flow request_in -> request_receive : request",
        "    flow request_receive -> examine : request",
        "    flow set_in -> set_receive : chalet",
        "    flow set_receive -> intersect : chalet",
        "    flow intersect -> release : chalet",
        "    flow release -> transfer : chalet",
        "  }",
        "  flow Seller.transfer -> Intake.transfer : chalet",
        "  flow Buyer.transfer -> Broker.request_in : request",
    ]
    lines += [f"  flow {p}_set.transfer -> Broker.set_in : chalet" for p in parameters]
    lines.append("  flow Broker.transfer -> Buyer.result_in : chalet")
    for i, p in enumerate(parameters):
        steps = " @3 @4" if i == 0 else ""
        lines.append(f"  trigger Intake.classify -> {p}_set.item{steps} when {p} = true")
    for i, p in enumerate(parameters):
        steps = " @16" if i == 0 else ""
        lines.append(f"  trigger Broker.examine -> {p}_set.ext{steps} when want_{p} = true")
    lines.append("}")
    return "\n".join(lines) + "\n"


def chalet_events_text(parameters: Sequence[str] = DEFAULT_PARAMETERS) -> str:
    sets = [f"{p}_set" for p in parameters]
    lines = [
        "# One event decomposition of the chalet market.",
        "event chalet-input",
        "  Seller.chalet Seller.release Seller.transfer Intake.transfer Intake.receive Intake.classify",
        "event set-insertion",
        *(f"  {s}.item {s}.insert" for s in sets),
        "event request",
        "  Buyer.request Buyer.release Buyer.transfer Broker.request_in Broker.request_receive Broker.examine",
        "event retrieval",
        *(f"  {s}.ext {s}.transfer" for s in sets),
        "event intersection",
        "  Broker.set_in Broker.set_receive Broker.intersect Broker.release Broker.transfer",
        "event delivery",
        "  Buyer.result_in Buyer.result",
    ]
    return "\n".join(lines) + "\n"


def chalet_scenario_text(catalog: Sequence[ChaletRecord], wants: Iterable[str], request_tick: Optional[int] = None) -> str:
    """Inject each chalet one tick apart, then the buyer request."""
    lines = ["# Chalets arrive one per tick; the buyer asks once all are filed."]
    for tick, r in enumerate(catalog):
        attrs = ", ".join([f'id = "{r.key}"', *(f"{p} = {'true' if v else 'false'}" for p, v in r.features.items())])
        lines.append(f"inject chalet at Seller.chalet tick {tick} {{ {attrs} }}")
    wants = sorted(set(wants))
    tick = len(catalog) + 6 if request_tick is None else request_tick
    req = ", ".join(f"want_{w} = true" for w in wants)
    lines.append(f"inject request at Buyer.request tick {tick} {{ {req} }}")
    lines.append("limit 500")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# car hire


@dataclass(frozen=True)
class Constraint:
    relation: str  # "precedes" | "parallel"
    first: str
    second: str

    def holds(self, graph: BehaviorGraph) -> bool:
        a, b = f"{self.first}#0", f"{self.second}#0"
        ids = set(graph.node_ids())
        if a not in ids or b not in ids:
            return False
        if self.relation == "precedes":
            return precedes(graph, a, b)
        reach = reachability(graph.successors())
        return b not in reach[a] and a not in reach[b]

    def __str__(self) -> str:
        return f"{self.first} {self.relation} {self.second}"


CAR_HIRE_CONSTRAINTS: tuple[Constraint, ...] = (
    Constraint("precedes", "request-send", "quote"),
    Constraint("precedes", "quote", "payment"),
    Constraint("precedes", "payment", "confirmation"),
    Constraint("precedes", "payment", "car-preparation"),
    Constraint("parallel", "notification-processing", "quote"),
    Constraint("parallel", "notification-processing", "payment"),
    Constraint("precedes", "car-use", "car-return"),
)

CAR_HIRE_STEPS = tuple(n for n in range(1, 25) if n != 18)


def car_hire_model() -> StaticModel:
    return parse_model(read("car_hire.tm"))


def car_hire_happy_path() -> tuple[StaticModel, Scenario, tuple[Constraint, ...]]:
    model = car_hire_model()
    return model, parse_scenario(read("car_hire_happy.scn"), model), CAR_HIRE_CONSTRAINTS


def event_specs(model: StaticModel, events_text: str) -> list[EventSpec]:
    return [EventSpec(name, make_region(model, paths)) for name, paths in parse_events(events_text, model).items()]


def car_hire_events(model: StaticModel) -> list[EventSpec]:
    return event_specs(model, read("car_hire.events"))


def chalet_model() -> StaticModel:
    return parse_model(read("chalet.tm"))


def chalet_demo() -> tuple[StaticModel, Scenario, list[EventSpec]]:
    model = chalet_model()
    return model, parse_scenario(read("chalet_demo.scn"), model), event_specs(model, read("chalet.events"))


CORPUS_MODELS = ("car_hire.tm", "chalet.tm")
GOLDEN = {
    "car_hire_happy": ("car_hire.tm", "car_hire_happy.scn", "car_hire.events"),
    "chalet_demo": ("chalet.tm", "chalet_demo.scn", "chalet.events"),
}
