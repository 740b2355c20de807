"""Boolean guard expressions over token attributes.

Evaluation is total: a comparison against a missing attribute, or between
values of incompatible types, is simply false.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Union

Literal = Union[bool, int, float, str]

_OPS: dict[str, Callable[[Any, Any], bool]] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
OPERATORS = tuple(_OPS)


def _comparable(a: Any, b: Any) -> bool:
    # bool is an int subclass; keep booleans apart from numbers
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool)
    if isinstance(a, str) or isinstance(b, str):
        return isinstance(a, str) and isinstance(b, str)
    return isinstance(a, (int, float)) and isinstance(b, (int, float))


def format_literal(value: Literal) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    return repr(value)


@dataclass(frozen=True)
class Compare:
    attribute: str
    op: str
    value: Literal

    def __post_init__(self) -> None:
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")

    def evaluate(self, attrs: Mapping[str, Any]) -> bool:
        if self.attribute not in attrs:
            return False
        actual = attrs[self.attribute]
        if not _comparable(actual, self.value):
            return False
        return bool(_OPS[self.op](actual, self.value))

    def attributes(self) -> frozenset[str]:
        return frozenset({self.attribute})

    def __str__(self) -> str:
        return f"{self.attribute} {self.op} {format_literal(self.value)}"


@dataclass(frozen=True)
class Not:
    operand: "Guard"

    def evaluate(self, attrs: Mapping[str, Any]) -> bool:
        return not self.operand.evaluate(attrs)

    def attributes(self) -> frozenset[str]:
        return self.operand.attributes()

    def __str__(self) -> str:
        if isinstance(self.operand, (Compare, Not)):
            return f"not {self.operand}"
        return f"not ({self.operand})"


@dataclass(frozen=True)
class And:
    operands: tuple["Guard", ...]

    def evaluate(self, attrs: Mapping[str, Any]) -> bool:
        return all(g.evaluate(attrs) for g in self.operands)

    def attributes(self) -> frozenset[str]:
        return frozenset().union(*(g.attributes() for g in self.operands))

    def __str__(self) -> str:
        # nested And/Or are parenthesised so the tree shape survives re-parsing
        return " and ".join(
            f"({g})" if isinstance(g, (And, Or)) else str(g) for g in self.operands
        )


@dataclass(frozen=True)
class Or:
    operands: tuple["Guard", ...]

    def evaluate(self, attrs: Mapping[str, Any]) -> bool:
        return any(g.evaluate(attrs) for g in self.operands)

    def attributes(self) -> frozenset[str]:
        return frozenset().union(*(g.attributes() for g in self.operands))

    def __str__(self) -> str:
        return " or ".join(f"({g})" if isinstance(g, Or) else str(g) for g in self.operands)


Guard = Union[Compare, Not, And, Or]


def conjunction(guards: list[Guard]) -> Guard:
    if len(guards) == 1:
        return guards[0]
    return And(tuple(guards))


def is_true(attribute: str) -> Compare:
    return Compare(attribute, "=", True)
