"""Executable thinging-machine (TM) models: parse, validate, simulate, extract behavior."""

from .behavior import BehaviorGraph, EventSpec, check_dag, extract_behavior, parallel_pairs
from .dsl import Diagnostic, ParseError, parse_model, parse_scenario, serialize_model
from .model import ActionKind, Region, StaticModel, build_model, make_region, resolve
from .simulator import Scenario, Trace, replay_check, simulate
from .validator import check_reachability, validate

__all__ = [
    "ActionKind",
    "BehaviorGraph",
    "Diagnostic",
    "EventSpec",
    "ParseError",
    "Region",
    "Scenario",
    "StaticModel",
    "Trace",
    "build_model",
    "check_dag",
    "check_reachability",
    "extract_behavior",
    "make_region",
    "parallel_pairs",
    "parse_model",
    "parse_scenario",
    "replay_check",
    "resolve",
    "serialize_model",
    "simulate",
    "validate",
]
