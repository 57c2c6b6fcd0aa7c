from __future__ import annotations

from collections.abc import Mapping
import dataclasses
from fractions import Fraction
import math
import operator
from typing import Any


_BINARY_OPERATORS = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}

_PRECEDENCE = {
    "==": 1,
    "!=": 1,
    "<": 1,
    "<=": 1,
    ">": 1,
    ">=": 1,
    "+": 2,
    "-": 2,
    "*": 3,
}


class Expr:
    """Classical expression over integer constants and classical variables.

    The language is deliberately tiny: integer and boolean literals, references to classical
    variables, ``+``, ``-``, ``*`` and comparisons. It is used for qubit widths, static
    arguments of built-ins and ``calc`` statements.
    """

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError

    def substitute(self, mapping: Mapping[str, Expr]) -> Expr:
        raise NotImplementedError

    def fold(self, env: Mapping[str, int] | None = None) -> Expr:
        """Evaluate every subexpression whose operands are known.

        Args:
            env:
                Values of classical variables known to be constant.

        Returns:
            An equivalent expression, a :class:`Const` if fully evaluated.

        """
        raise NotImplementedError

    def evaluate(self, env: Mapping[str, int]) -> int:
        folded = self.fold(env)
        if not isinstance(folded, Const):
            raise KeyError(
                "Expression '{}' depends on unknown variables {}.".format(
                    self, sorted(folded.free_vars())
                )
            )
        return folded.value

    def precedence(self) -> int:
        return 4


@dataclasses.dataclass(frozen=True)
class Const(Expr):
    value: int

    def free_vars(self) -> frozenset[str]:
        return frozenset()

    def substitute(self, mapping: Mapping[str, Expr]) -> Expr:
        return self

    def fold(self, env: Mapping[str, int] | None = None) -> Expr:
        return self

    def __str__(self) -> str:
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        return str(self.value)


@dataclasses.dataclass(frozen=True)
class Ref(Expr):
    """Reference to a classical variable by name (without the ``$`` prefix)."""

    name: str

    def free_vars(self) -> frozenset[str]:
        return frozenset([self.name])

    def substitute(self, mapping: Mapping[str, Expr]) -> Expr:
        return mapping.get(self.name, self)

    def fold(self, env: Mapping[str, int] | None = None) -> Expr:
        if env is not None and self.name in env:
            return Const(env[self.name])
        return self

    def __str__(self) -> str:
        return "$" + self.name


@dataclasses.dataclass(frozen=True)
class BinOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr

    def __post_init__(self) -> None:
        if self.op not in _BINARY_OPERATORS:
            raise ValueError("Unknown operator '{}'.".format(self.op))

    def free_vars(self) -> frozenset[str]:
        return self.lhs.free_vars() | self.rhs.free_vars()

    def substitute(self, mapping: Mapping[str, Expr]) -> Expr:
        return BinOp(self.op, self.lhs.substitute(mapping), self.rhs.substitute(mapping))

    def fold(self, env: Mapping[str, int] | None = None) -> Expr:
        lhs = self.lhs.fold(env)
        rhs = self.rhs.fold(env)
        if isinstance(lhs, Const) and isinstance(rhs, Const):
            return Const(_BINARY_OPERATORS[self.op](lhs.value, rhs.value))
        return BinOp(self.op, lhs, rhs)

    def precedence(self) -> int:
        return _PRECEDENCE[self.op]

    def __str__(self) -> str:
        prec = self.precedence()
        lhs = str(self.lhs)
        if self.lhs.precedence() < prec or (prec == 1 and self.lhs.precedence() == 1):
            lhs = "(" + lhs + ")"
        rhs = str(self.rhs)
        # Left associative: an equal-precedence right operand needs parentheses.
        if self.rhs.precedence() <= prec:
            rhs = "(" + rhs + ")"
        return "{} {} {}".format(lhs, self.op, rhs)


def as_expr(value: Any) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (bool, int)):
        return Const(value)
    raise TypeError("Cannot convert {!r} to an expression.".format(value))


def format_angle(turns: Fraction) -> str:
    """Format an angle given as a rational multiple of pi.

    Args:
        turns:
            The angle divided by pi.

    Returns:
        ``pi``, ``-pi/4``, ``3*pi/4`` style text; ``0`` for the zero angle.

    """
    turns = Fraction(turns)
    if turns == 0:
        return "0"
    num, den = turns.numerator, turns.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    text = "pi" if num == 1 else "{}*pi".format(num)
    if den != 1:
        text += "/{}".format(den)
    return sign + text


def angle_radians(turns: Fraction) -> float:
    return float(turns) * math.pi
