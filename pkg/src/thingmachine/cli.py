"""Command line: validate, simulate, behavior, dot, chalet.

Exit status: 0 success, 1 diagnostics with errors, 2 usage error, 3 I/O error.
Results go to standard output, diagnostics to standard error (``validate``
prints its diagnostics on standard output since they are its result).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import corpus
from .behavior import CyclicBehavior, extract_behavior, format_behavior, parse_behavior
from .dot import behavior_to_dot, model_to_dot
from .dsl import ParseError, parse_events, parse_model, parse_scenario
from .model import StaticModel, make_region
from .behavior import EventSpec
from .setmachine import select
from .simulator import ScenarioEntryInvalid, format_trace, simulate
from .validator import errors, validate

OK, DIAGNOSTICS, USAGE, IO_ERROR = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, status: int, message: str = ""):
        super().__init__(message)
        self.status = status


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Fail(IO_ERROR, f"{path}: cannot read: {exc}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Fail(IO_ERROR, f"{path}: cannot write: {exc}") from None


def _load_model(path: str) -> StaticModel:
    text = _read(path)
    try:
        return parse_model(text)
    except ParseError as exc:
        raise _Fail(DIAGNOSTICS, "\n".join(d.render(path) for d in exc.diagnostics)) from None


def _checked_model(path: str) -> StaticModel:
    model = _load_model(path)
    errs = errors(validate(model))
    if errs:
        raise _Fail(DIAGNOSTICS, "\n".join(d.render() for d in errs))
    return model


def _run(model_path: str, scenario_path: str):
    model = _checked_model(model_path)
    text = _read(scenario_path)
    try:
        scenario = parse_scenario(text, model)
        return model, simulate(model, scenario)
    except ParseError as exc:
        raise _Fail(DIAGNOSTICS, "\n".join(d.render(scenario_path) for d in exc.diagnostics)) from None
    except ScenarioEntryInvalid as exc:
        raise _Fail(DIAGNOSTICS, f"{scenario_path}: error: {exc}") from None


def _behavior(model_path: str, scenario_path: str, events_path: str):
    model, trace = _run(model_path, scenario_path)
    text = _read(events_path)
    try:
        events = parse_events(text, model)
    except ParseError as exc:
        raise _Fail(DIAGNOSTICS, "\n".join(d.render(events_path) for d in exc.diagnostics)) from None
    specs = [EventSpec(name, make_region(model, paths)) for name, paths in events.items()]
    graph = extract_behavior(trace, specs)
    for w in graph.warnings:
        print(f"{events_path}: warning: {w}", file=sys.stderr)
    return graph


def cmd_validate(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    diagnostics = validate(model)
    for d in diagnostics:
        print(d.render())
    return DIAGNOSTICS if errors(diagnostics) else OK


def cmd_simulate(args: argparse.Namespace) -> int:
    _, trace = _run(args.model, args.scenario)
    _write(args.out, format_trace(trace))
    return OK


def cmd_behavior(args: argparse.Namespace) -> int:
    graph = _behavior(args.model, args.scenario, args.events)
    _write(args.out, format_behavior(graph))
    return OK


def cmd_dot(args: argparse.Namespace) -> int:
    if args.listing:
        try:
            graph = parse_behavior(_read(args.listing))
        except (CyclicBehavior, ValueError) as exc:
            raise _Fail(DIAGNOSTICS, f"{args.listing}: error: {exc}") from None
        _write(args.out, behavior_to_dot(graph))
    elif args.model is None:
        raise _Fail(USAGE, "dot: give a model file or --listing")
    elif args.scenario or args.events:
        if not (args.scenario and args.events):
            raise _Fail(USAGE, "dot: --scenario and --events go together")
        _write(args.out, behavior_to_dot(_behavior(args.model, args.scenario, args.events)))
    else:
        _write(args.out, model_to_dot(_load_model(args.model)))
    return OK


def cmd_chalet(args: argparse.Namespace) -> int:
    try:
        catalog = corpus.load_catalog(args.catalog)
    except OSError as exc:
        raise _Fail(IO_ERROR, f"{args.catalog}: cannot read: {exc}") from None
    except corpus.CatalogError as exc:
        raise _Fail(DIAGNOSTICS, f"{args.catalog}: error: {exc}") from None
    try:
        result = corpus.run_chalet_pipeline(catalog, args.want)
    except corpus.UnknownParameter as exc:
        raise _Fail(DIAGNOSTICS, f"error: {exc}") from None
    for key in result.keys():
        print(key)
    pick = select(result)
    print(f"pick: {pick.key if pick is not None else 'no chalet'}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thingmachine", description="Executable thinging-machine models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model's well-formedness")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a scenario and write its trace")
    p.add_argument("model")
    p.add_argument("scenario")
    p.add_argument("--out", help="trace file (default: standard output)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("behavior", help="list the behavior DAG of a run")
    p.add_argument("model")
    p.add_argument("scenario")
    p.add_argument("events")
    p.add_argument("--out")
    p.set_defaults(func=cmd_behavior)

    p = sub.add_parser("dot", help="GraphViz output for a model or a behavior graph")
    p.add_argument("model", nargs="?")
    p.add_argument("--scenario")
    p.add_argument("--events")
    p.add_argument("--listing", help="behavior listing produced by 'behavior'")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("chalet", help="chalets matching every wanted parameter")
    p.add_argument("catalog")
    p.add_argument("--want", action="append", required=True, metavar="PARAMETER")
    p.set_defaults(func=cmd_chalet)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except _Fail as exc:
        if str(exc):
            print(str(exc), file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
