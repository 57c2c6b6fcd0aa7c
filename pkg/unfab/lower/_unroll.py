from __future__ import annotations

from collections.abc import Mapping
import dataclasses
from fractions import Fraction
from typing import Union

from optuna.logging import get_logger

from unfab.census import CallCensus
from unfab.exceptions import FuelExhaustedError
from unfab.exceptions import SynthesisError
from unfab.exceptions import UnresolvedClassicalError
from unfab.ir import BUILTINS
from unfab.ir import Const
from unfab.ir import Expr
from unfab.ir import FunctionDef
from unfab.ir import Literal
from unfab.ir import make_condition
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import Operation
from unfab.ir import Program
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir import VarKind
from unfab.pipeline import derive


_logger = get_logger(__name__)

DEFAULT_FUEL = 10**6

_Ident = tuple[VarKind, str]
# Quantum variables bind to variables of the flat body, classical ones to a constant or to the
# flat variable of a measurement result, garbage to a stack of bindings.
_Binding = Union[Var, int, list]

_SELF_INVERSE = ("X", "CX", "H")
_NEGATED_ANGLE = ("ry", "phase")


def _normalize(op: Operation) -> Operation:
    # Built-ins carry no garbage; spell each remaining adjoint as a plain built-in if possible.
    adjoint = sum(1 for mode in op.modes if mode is Mode.ADJOINT) % 2 == 1
    if not adjoint:
        return Operation(op.target, (), op.static_args)
    if op.target in _SELF_INVERSE:
        return Operation(op.target, (), op.static_args)
    if op.target in _NEGATED_ANGLE:
        return Operation(op.target, (), (-Fraction(op.static_args[0]),))
    inverse = BUILTINS[op.target].inverse
    if inverse is not None:
        return Operation(inverse, (), op.static_args)
    if op.target in ("new", "dup"):
        return Operation(op.target, (Mode.ADJOINT,), op.static_args)
    raise SynthesisError("'{}' has no adjoint.".format(op))


def _flatten(value: list) -> list[Var]:
    out: list[Var] = []
    for item in value:
        if isinstance(item, list):
            out.extend(_flatten(item))
        else:
            out.append(item)
    return out


@dataclasses.dataclass
class _Frame:
    function: FunctionDef
    values: dict[_Ident, _Binding]
    condition: tuple[Literal, ...]
    bin: list = dataclasses.field(default_factory=list)

    def env(self) -> dict[str, int]:
        return {
            name: value
            for (kind, name), value in self.values.items()
            if kind is VarKind.CLASSICAL and isinstance(value, int)
        }


class _Unroller:
    def __init__(self, program: Program, fuel: int, census: CallCensus, taken: set[str]) -> None:
        self.program = program
        self.budget = fuel
        self.fuel = fuel
        self.census = census
        self.taken = taken
        self.counters: dict[str, int] = {}
        self.body: list[Statement] = []

    def fresh(self, var: Var, width: Expr | None) -> Var:
        name = var.name
        if name in self.taken:
            base = var.name.rstrip("'") or var.name
            k = self.counters.get(base, 0)
            while name in self.taken:
                k += 1
                name = "{}_{}".format(base, k)
            self.counters[base] = k
        self.taken.add(name)
        return Var(name, var.kind, width)

    def value(self, frame: _Frame, var: Var) -> _Binding:
        try:
            return frame.values[var.ident]
        except KeyError:
            raise SynthesisError(
                "{} is not defined where '{}' uses it.".format(var, frame.function.key)
            ) from None

    def take(self, frame: _Frame, var: Var) -> _Binding:
        value = self.value(frame, var)
        del frame.values[var.ident]
        return value

    def width(self, frame: _Frame, var: Var) -> Expr | None:
        if var.width is None:
            return None
        folded = var.width.fold(frame.env())
        if not isinstance(folded, Const):
            raise UnresolvedClassicalError(
                "Width '{}' of {} in '{}' is not a constant.".format(
                    var.width, var, frame.function.key
                )
            )
        return Const(int(folded.value))

    def static_args(self, frame: _Frame, op: Operation) -> Operation:
        if not any(isinstance(arg, Expr) for arg in op.static_args):
            return op
        args = []
        env = frame.env()
        for arg in op.static_args:
            if isinstance(arg, Expr):
                arg = arg.fold(env)
                if not isinstance(arg, Const):
                    raise UnresolvedClassicalError(
                        "'{}' in '{}' is not a constant.".format(arg, frame.function.key)
                    )
            args.append(arg)
        return dataclasses.replace(op, static_args=tuple(args))

    def condition(self, frame: _Frame, stmt: Statement) -> tuple[Literal, ...] | None:
        literals = list(frame.condition)
        for literal in stmt.condition:
            value = self.value(frame, literal.var)
            if isinstance(value, Var):
                literals.append(Literal(value, literal.negated))
            elif isinstance(value, int):
                if bool(value) == literal.negated:
                    return None
            else:
                raise SynthesisError("Garbage {} used as a condition.".format(literal.var))
        try:
            return make_condition(literals)
        except ValueError:
            return None

    def run(self, frame: _Frame) -> None:
        for stmt in frame.function.body:
            condition = self.condition(frame, stmt)
            if condition is None:
                continue
            if stmt.op.is_builtin:
                self.builtin(frame, stmt, condition)
            else:
                self.call(frame, stmt, condition)

    def builtin(self, frame: _Frame, stmt: Statement, condition: tuple[Literal, ...]) -> None:
        op = stmt.op
        if op.is_("dispose"):
            if op.flip_count() % 2 == 1:
                if not frame.bin:
                    raise SynthesisError("Empty garbage bin in '{}'.".format(frame.function.key))
                frame.values[stmt.produced_quantum[0].ident] = frame.bin.pop()
            else:
                frame.bin.append(self.take(frame, stmt.consumed[0]))
            return
        if op.is_("calc"):
            expr = op.static_args[0].fold(frame.env())
            if not isinstance(expr, Const):
                raise UnresolvedClassicalError(
                    "'{}' in '{}' depends on {}.".format(
                        op.static_args[0], frame.function.key, sorted(expr.free_vars())
                    )
                )
            frame.values[stmt.produced_classical[0].ident] = int(expr.value)
            return
        if op.is_("forget"):
            raise SynthesisError(
                "'{}' still forgets; synthesize its uncomputation first.".format(
                    frame.function.key
                )
            )
        for var in stmt.consumed:
            if var.is_garbage:
                self.take(frame, var)
        for var in stmt.produced_quantum:
            if var.is_garbage:
                frame.values[var.ident] = []
        op = _normalize(op)
        if op.target in ("distribute", "select") and stmt.conserved[0].is_classical:
            control = self.value(frame, stmt.conserved[0])
            if isinstance(control, int):
                self.route(frame, stmt, op, bool(control))
                return
        self.emit(frame, stmt, op, condition)

    def route(self, frame: _Frame, stmt: Statement, op: Operation, value: bool) -> None:
        slot = 1 if value else 0
        ins = [v for v in stmt.consumed if not v.is_garbage]
        outs = [v for v in stmt.produced_quantum if not v.is_garbage]
        if op.target == "distribute":
            frame.values[outs[slot].ident] = self.take(frame, ins[0])
            return
        frame.values[outs[0].ident] = self.take(frame, ins[slot])
        # The other branch is never defined when the control is known.
        frame.values.pop(ins[1 - slot].ident, None)

    def emit(
        self, frame: _Frame, stmt: Statement, op: Operation, condition: tuple[Literal, ...]
    ) -> None:
        conserved = [self.value(frame, v) for v in stmt.conserved]
        consumed = [self.take(frame, v) for v in stmt.consumed if not v.is_garbage]
        for value in conserved + consumed:
            if not isinstance(value, Var):
                raise SynthesisError("'{}' needs variables, got {!r}.".format(op, value))
        produced_classical = tuple(self.fresh(v, None) for v in stmt.produced_classical)
        outs = [v for v in stmt.produced_quantum if not v.is_garbage]
        produced_quantum = tuple(self.fresh(v, self.width(frame, v)) for v in outs)
        self.body.append(
            Statement(
                op=self.static_args(frame, op),
                effect=stmt.effect,
                produced_classical=produced_classical,
                produced_quantum=produced_quantum,
                conserved=tuple(conserved),  # type: ignore[arg-type]
                consumed=tuple(consumed),  # type: ignore[arg-type]
                condition=condition,
                span=stmt.span,
            )
        )
        for var, flat in zip(stmt.produced_classical, produced_classical):
            frame.values[var.ident] = flat
        for var, flat in zip(outs, produced_quantum):
            frame.values[var.ident] = flat

    def call(self, frame: _Frame, stmt: Statement, condition: tuple[Literal, ...]) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhaustedError(
                "Inlining needs more than {} calls (at '{}').".format(self.budget, stmt.op)
            )
        self.census.record(stmt.op.key)
        callee = derive(self.program, stmt.op.key)
        inner = _Frame(callee, {}, condition)
        k = len(callee.classical_in)
        for param, arg in zip(callee.classical_in, stmt.conserved[:k]):
            inner.values[param.ident] = self.value(frame, arg)
        for param, arg in zip(callee.conserved_params, stmt.conserved[k:]):
            inner.values[param.ident] = self.value(frame, arg)
        for param, arg in zip(callee.consumed_params, stmt.consumed):
            inner.values[param.ident] = self.take(frame, arg)
        if callee.bin is not None:
            bin_ = inner.values.setdefault(callee.bin.ident, [])
            assert isinstance(bin_, list)
            inner.bin = bin_
        self.run(inner)
        for ret, out in zip(callee.returned_classical, stmt.produced_classical):
            frame.values[out.ident] = self.value(inner, ret)
        for ret, out in zip(callee.returned_quantum, stmt.produced_quantum):
            frame.values[out.ident] = self.take(inner, ret)


def _unroll_entry(
    program: Program,
    key: ModeKey,
    classical_args: Mapping[str, int],
    fuel: int,
    census: CallCensus,
) -> tuple[FunctionDef, list[str]]:
    # Also returns the name each flat result has in a simulation of the entry.
    f = derive(program, key)
    taken = {v.name for v in f.params}
    unroller = _Unroller(program, fuel, census, taken)
    frame = _Frame(f, {}, ())
    for var in f.classical_in:
        if var.name not in classical_args:
            raise UnresolvedClassicalError(
                "Missing classical argument ${} of '{}'.".format(var.name, key)
            )
        frame.values[var.ident] = int(classical_args[var.name])
    conserved: list[Var] = []
    consumed: list[Var] = []
    for params, out in ((f.conserved_params, conserved), (f.consumed_params, consumed)):
        for var in params:
            if var.is_garbage:
                raise SynthesisError("Entry '{}' consumes garbage {}.".format(key, var))
            flat = dataclasses.replace(var, width=unroller.width(frame, var))
            frame.values[var.ident] = flat
            out.append(flat)
    if f.bin is not None:
        bin_ = frame.values.setdefault(f.bin.ident, [])
        assert isinstance(bin_, list)
        frame.bin = bin_
    try:
        unroller.run(frame)
    except RecursionError:
        raise FuelExhaustedError("Recursion of '{}' does not unroll.".format(key)) from None

    returned_quantum: list[Var] = []
    names: list[str] = []
    for var in f.returned_quantum:
        value = unroller.take(frame, var)
        if isinstance(value, list):
            flat_garbage = _flatten(value)
            returned_quantum.extend(flat_garbage)
            names.extend("{}.{}".format(var.name, k) for k in range(len(flat_garbage)))
        else:
            assert isinstance(value, Var)
            returned_quantum.append(value)
            names.append(var.name)
    returned_classical: list[Var] = []
    for var in f.returned_classical:
        value = unroller.value(frame, var)
        if isinstance(value, int):
            out_var = unroller.fresh(var, None)
            unroller.body.append(
                Statement(op=Operation("calc", (), (Const(value),)), produced_classical=(out_var,))
            )
            value = out_var
        assert isinstance(value, Var)
        returned_classical.append(value)
    _logger.debug(
        "Unrolled {} into {} statements with {} calls.".format(
            key, len(unroller.body), unroller.budget - unroller.fuel
        )
    )
    flat_function = FunctionDef(
        name=key.base,
        conserved_params=tuple(conserved),
        consumed_params=tuple(consumed),
        body=tuple(unroller.body),
        returned_classical=tuple(returned_classical),
        returned_quantum=tuple(returned_quantum),
        declared_effect=f.declared_effect,
        span=f.span,
    )
    return flat_function, names


def inline_unroll(
    program: Program,
    entry: str | ModeKey,
    classical_args: Mapping[str, int] | None = None,
    fuel: int = DEFAULT_FUEL,
    census: CallCensus | None = None,
) -> FunctionDef:
    """Inline every call reachable from ``entry`` into one flat function.

    Classical parameters are fixed by ``classical_args``; conditions and control values that
    fold to constants select the live branch, which unrolls recursion. Garbage bins are
    resolved while inlining, so the flat function has no garbage variables: a garbage-mode
    entry returns the qubits of its garbage after its other results. Measurement results stay
    symbolic and keep conditioning the statements that read them.

    Args:
        program:
            A program prepared by :func:`~unfab.pipeline.prepare`; derived callees are derived
            on demand.
        entry:
            Name or mode key of the entry function.
        classical_args:
            Values of the classical parameters of the entry.
        fuel:
            Maximum number of inlined calls.
        census:
            Receives one record per inlined call.

    Returns:
        A function without user calls, classical parameters or garbage.

    Raises:
        :exc:`~unfab.exceptions.FuelExhaustedError`:
            If more than ``fuel`` calls are inlined or the recursion does not terminate.
        :exc:`~unfab.exceptions.UnresolvedClassicalError`:
            If a classical argument is missing or a computed value depends on a measurement.
        :exc:`~unfab.exceptions.SynthesisError`:
            If a ``forget`` remains or the entry consumes garbage.

    """
    key = entry if isinstance(entry, ModeKey) else ModeKey(entry)
    flat, _ = _unroll_entry(
        program,
        key,
        dict(classical_args or {}),
        fuel,
        census if census is not None else CallCensus(),
    )
    return flat
