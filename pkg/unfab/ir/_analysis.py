from __future__ import annotations

from collections.abc import Iterator

from unfab.ir._nodes import FunctionDef
from unfab.ir._nodes import Literal
from unfab.ir._nodes import make_condition
from unfab.ir._nodes import Operation
from unfab.ir._nodes import Statement
from unfab.ir._nodes import Var
from unfab.ir._nodes import VarKind


_Ident = tuple[VarKind, str]


def splits(op: Operation) -> bool:
    """Whether ``op`` splits one variable into two control-indexed branch copies."""
    flips = op.flip_count()
    return (op.target == "distribute" and flips % 2 == 0) or (
        op.target == "select" and flips % 2 == 1
    )


def merges(op: Operation) -> bool:
    """Whether ``op`` merges two control-indexed branch copies into one variable."""
    flips = op.flip_count()
    return (op.target == "select" and flips % 2 == 0) or (
        op.target == "distribute" and flips % 2 == 1
    )


def branch_literal(stmt: Statement, slot: int) -> Literal:
    # Slot 0 holds the value when the control is false, slot 1 when it is true.
    return Literal(stmt.conserved[0], negated=(slot == 0))


def produced_context(stmt: Statement, var: Var) -> tuple[Literal, ...]:
    """The clause under which ``var`` is defined right after ``stmt``."""
    if splits(stmt.op) and var.is_quantum:
        slot = stmt.produced_quantum.index(var)
        if slot < 2:
            return make_condition(stmt.condition + (branch_literal(stmt, slot),))
    return stmt.condition


def consumed_context(stmt: Statement, var: Var) -> tuple[Literal, ...]:
    """The clause under which ``stmt`` expects its consumed argument ``var`` to be defined."""
    if merges(stmt.op) and var.is_quantum:
        slot = stmt.consumed.index(var)
        if slot < 2:
            return make_condition(stmt.condition + (branch_literal(stmt, slot),))
    return stmt.condition


class DefUse:
    """Producer, consumer and conserved-use index of a function body.

    Statements are referred to by their index in ``function.body``. Parameters have no
    producer and returned variables have no consumer. The first producer or consumer wins
    when the body is not in SSA form; :func:`~unfab.ir.structural_check` reports the rest.
    """

    def __init__(self, function: FunctionDef) -> None:
        self.function = function
        self._producers: dict[_Ident, int] = {}
        self._consumers: dict[_Ident, int] = {}
        self._uses: dict[_Ident, list[int]] = {}
        self._vars: dict[_Ident, Var] = {}
        for index, stmt in enumerate(function.body):
            for var in stmt.produced:
                self._producers.setdefault(var.ident, index)
                self._vars.setdefault(var.ident, var)
            for var in stmt.consumed:
                self._consumers.setdefault(var.ident, index)
            for var in stmt.used_vars():
                self._uses.setdefault(var.ident, []).append(index)
        self._params = {v.ident for v in function.params}
        for var in function.params:
            self._vars.setdefault(var.ident, var)

    def producer(self, var: Var) -> int | None:
        return self._producers.get(var.ident)

    def consumer(self, var: Var) -> int | None:
        return self._consumers.get(var.ident)

    def uses(self, var: Var) -> list[int]:
        return list(self._uses.get(var.ident, ()))

    def is_param(self, var: Var) -> bool:
        return var.ident in self._params

    def lookup(self, var: Var) -> Var:
        """Return the declaration of ``var`` (which carries its width)."""
        return self._vars.get(var.ident, var)

    def context(self, var: Var) -> tuple[Literal, ...]:
        """The clause under which ``var`` is defined; parameters are always defined."""
        index = self.producer(var)
        if index is None:
            return ()
        return produced_context(self.function.body[index], var)

    def uses_between(self, var: Var, start: int, stop: int) -> Iterator[int]:
        for index in self.uses(var):
            if start < index < stop:
                yield index

    def producer_statement(self, var: Var) -> Statement | None:
        index = self.producer(var)
        return None if index is None else self.function.body[index]
