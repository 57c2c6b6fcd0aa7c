from __future__ import annotations

from collections.abc import Sequence
import dataclasses
from fractions import Fraction

from optuna.logging import get_logger

from unfab.exceptions import SynthesisError
from unfab.ir import Const
from unfab.ir import FunctionDef
from unfab.ir import Literal
from unfab.ir import Mode
from unfab.ir import Operation
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir import VarKind


_logger = get_logger(__name__)

_Ident = tuple[VarKind, str]
_Root = object

_T = Fraction(1, 4)


class _Wire:
    """One qubit of the decomposed function; ``var`` is its current SSA name."""

    def __init__(self, var: Var) -> None:
        self.var = var
        self.refs = 1


def _find(parent: dict[int, int], i: int) -> int:
    while parent.setdefault(i, i) != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _allocates(stmt: Statement) -> bool:
    return stmt.op.target in ("new", "dup") and not stmt.op.modes


def alias_groups(f: FunctionDef) -> dict[int, int]:
    """Group allocations that a ``select`` merges and that may share their qubits.

    Two allocations are grouped when they feed the two branches of one ``select`` and each is
    made under the literal of its branch, so at most one of them is ever nonzero.

    Returns:
        The representative of the group of every grouped allocation statement, by index.

    """
    roots: dict[_Ident, _Root] = {v.ident: ("param", v.name) for v in f.params}
    parent: dict[int, int] = {}
    for index, stmt in enumerate(f.body):
        target = stmt.op.target
        outs = stmt.produced_quantum
        if _allocates(stmt):
            roots[outs[0].ident] = index
        elif target in ("X", "H", "ry", "CX", "distribute"):
            for out in outs:
                roots[out.ident] = roots.get(stmt.consumed[0].ident)
        elif target == "select":
            low, high = (roots.get(v.ident) for v in stmt.consumed)
            control = stmt.conserved[0]
            if (
                isinstance(low, int)
                and isinstance(high, int)
                and low != high
                and Literal(control, True) in f.body[low].condition
                and Literal(control, False) in f.body[high].condition
            ):
                parent[_find(parent, high)] = _find(parent, low)
            roots[outs[0].ident] = low
        else:
            for out in outs:
                roots[out.ident] = ("stmt", index)
    return {i: _find(parent, i) for i in list(parent)}


class _Emitter:
    def __init__(self, taken: set[str]) -> None:
        self.taken = taken
        self.counters: dict[str, int] = {}
        self.body: list[Statement] = []
        self.guard: tuple[Literal, ...] = ()

    def fresh(self, base: str) -> Var:
        base = base.rstrip("'") or base
        k = self.counters.get(base, 0)
        name = base
        while name in self.taken:
            k += 1
            name = "{}_{}".format(base, k)
        self.counters[base] = k
        self.taken.add(name)
        return Var(name)

    def stem(self, var: Var) -> str:
        return var.name.rsplit("_", 1)[0] if "_" in var.name else var.name

    def emit(self, stmt: Statement) -> None:
        self.body.append(dataclasses.replace(stmt, condition=stmt.condition + self.guard))

    def unary(self, op: Operation, wire: _Wire, conserved: tuple[Var, ...] = ()) -> None:
        out = self.fresh(self.stem(wire.var))
        self.emit(
            Statement(op=op, produced_quantum=(out,), conserved=conserved, consumed=(wire.var,))
        )
        wire.var = out

    def x(self, wire: _Wire) -> None:
        self.unary(Operation("X"), wire)

    def h(self, wire: _Wire) -> None:
        self.unary(Operation("H"), wire)

    def ry(self, wire: _Wire, angle: Fraction) -> None:
        self.unary(Operation("ry", (), (angle,)), wire)

    def cx(self, control: _Wire, target: _Wire) -> None:
        self.unary(Operation("CX"), target, (control.var,))

    def u1(self, wire: _Wire, angle: Fraction) -> None:
        self.emit(Statement(op=Operation("phase", (), (angle,)), condition=(Literal(wire.var),)))

    def alloc(self, base: str) -> _Wire:
        var = self.fresh(base)
        self.body.append(Statement(op=Operation("new", (), (0,)), produced_quantum=(var,)))
        return _Wire(var)

    def release(self, wire: _Wire) -> None:
        wire.refs -= 1
        if wire.refs == 0:
            self.body.append(
                Statement(op=Operation("new", (Mode.ADJOINT,), (0,)), consumed=(wire.var,))
            )

    def toffoli(self, a: _Wire, b: _Wire, t: _Wire) -> None:
        self.h(t)
        self.cx(b, t)
        self.u1(t, -_T)
        self.cx(a, t)
        self.u1(t, _T)
        self.cx(b, t)
        self.u1(t, -_T)
        self.cx(a, t)
        self.u1(b, _T)
        self.u1(t, _T)
        self.h(t)
        self.cx(a, b)
        self.u1(a, _T)
        self.u1(b, -_T)
        self.cx(a, b)

    def conjunction(self, controls: Sequence[_Wire]) -> tuple[_Wire, list]:
        # V-chain: ancilla i holds the AND of the first i + 2 controls.
        steps = []
        acc = controls[0]
        for wire in controls[1:]:
            anc = self.alloc("anc")
            self.toffoli(acc, wire, anc)
            steps.append((acc, wire, anc))
            acc = anc
        return acc, steps

    def unconjunction(self, steps: list) -> None:
        for a, b, anc in reversed(steps):
            self.toffoli(a, b, anc)
            self.release(anc)

    def mcx(self, controls: Sequence[_Wire], target: _Wire) -> None:
        if len(controls) == 0:
            self.x(target)
        elif len(controls) == 1:
            self.cx(controls[0], target)
        elif len(controls) == 2:
            self.toffoli(controls[0], controls[1], target)
        else:
            acc, steps = self.conjunction(controls[:-1])
            self.toffoli(acc, controls[-1], target)
            self.unconjunction(steps)

    def controlled_phase(self, controls: Sequence[_Wire], angle: Fraction) -> None:
        if len(controls) == 0:
            return
        if len(controls) == 1:
            self.u1(controls[0], angle)
        elif len(controls) == 2:
            a, b = controls
            self.u1(a, angle / 2)
            self.cx(a, b)
            self.u1(b, -angle / 2)
            self.cx(a, b)
            self.u1(b, angle / 2)
        else:
            acc, steps = self.conjunction(controls)
            self.u1(acc, angle)
            self.unconjunction(steps)

    def controlled_h(self, controls: Sequence[_Wire], target: _Wire) -> None:
        if not controls:
            self.h(target)
            return
        self.ry(target, Fraction(1, 4))
        self.mcx(controls, target)
        self.ry(target, Fraction(-1, 4))

    def controlled_ry(self, controls: Sequence[_Wire], target: _Wire, angle: Fraction) -> None:
        if not controls:
            self.ry(target, angle)
            return
        self.ry(target, angle / 2)
        self.mcx(controls, target)
        self.ry(target, -angle / 2)
        self.mcx(controls, target)


class _Decomposer:
    def __init__(self, f: FunctionDef) -> None:
        self.f = f
        self.out = _Emitter({v.name for v in f.all_vars().values()})
        self.wires: dict[_Ident, list[_Wire]] = {}
        self.groups = alias_groups(f)
        self.group_wires: dict[int, list[_Wire]] = {}

    def bind_param(self, var: Var) -> None:
        width = _width(var)
        if width == 1:
            self.wires[var.ident] = [_Wire(var)]
            return
        parts = tuple(self.out.fresh("{}_{}".format(var.name, i)) for i in range(width))
        self.out.body.append(
            Statement(
                op=Operation("uncat", (), (width,) + (Const(1),) * width),
                produced_quantum=parts,
                consumed=(var,),
            )
        )
        self.wires[var.ident] = [_Wire(p) for p in parts]

    def finish(self, var: Var) -> Var:
        wires = self.wires.pop(var.ident)
        if len(wires) == 1:
            return wires[0].var
        out = self.out.fresh(var.name)
        self.out.body.append(
            Statement(
                op=Operation("cat", (), (len(wires),) + (Const(1),) * len(wires)),
                produced_quantum=(Var(out.name, VarKind.QUANTUM, Const(len(wires))),),
                consumed=tuple(w.var for w in wires),
            )
        )
        return Var(out.name, VarKind.QUANTUM, Const(len(wires)))

    def take(self, var: Var) -> list[_Wire]:
        try:
            return self.wires.pop(var.ident)
        except KeyError:
            raise SynthesisError("{} is not live in '{}'.".format(var, self.f.key)) from None

    def get(self, var: Var) -> list[_Wire]:
        try:
            return self.wires[var.ident]
        except KeyError:
            raise SynthesisError("{} is not live in '{}'.".format(var, self.f.key)) from None

    def allocate(self, index: int, base: str, width: int) -> list[_Wire]:
        group = self.groups.get(index)
        if group is not None:
            shared = self.group_wires.get(group)
            if shared is not None and len(shared) == width and all(w.refs > 0 for w in shared):
                for wire in shared:
                    wire.refs += 1
                return list(shared)
        wires = [self.out.alloc(base) for _ in range(width)]
        if group is not None:
            self.group_wires[group] = wires
        return wires

    def run(self) -> FunctionDef:
        f = self.f
        params = f.conserved_params + f.consumed_params
        for var in params:
            self.bind_param(var)
        for index, stmt in enumerate(f.body):
            self.statement(index, stmt)
        returned = [self.finish(v) for v in f.conserved_params + f.returned_quantum]
        _logger.debug("Decomposed {} into {} statements.".format(f.key, len(self.out.body)))
        return dataclasses.replace(
            f,
            conserved_params=(),
            consumed_params=params,
            body=tuple(self.out.body),
            returned_quantum=tuple(returned),
        )

    def statement(self, index: int, stmt: Statement) -> None:
        out = self.out
        out.guard = tuple(lit for lit in stmt.condition if lit.var.is_classical)
        controls: list[_Wire] = []
        negated: list[_Wire] = []
        for literal in stmt.condition:
            if literal.var.is_classical:
                continue
            wires = self.get(literal.var)
            if literal.negated:
                if len(wires) != 1:
                    raise SynthesisError("Negated condition on register {}.".format(literal.var))
                negated.append(wires[0])
            controls.extend(w for w in wires if w not in controls)
        for wire in negated:
            out.x(wire)
        self.dispatch(index, stmt, controls)
        for wire in negated:
            out.x(wire)

    def dispatch(self, index: int, stmt: Statement, controls: list[_Wire]) -> None:
        out = self.out
        op = stmt.op
        target = op.target
        adjoint = bool(op.modes)
        if target == "calc":
            out.emit(stmt)
        elif target == "new":
            value = int(op.static_args[0])
            if adjoint:
                wires = self.take(stmt.consumed[0])
            else:
                var = stmt.produced_quantum[0]
                wires = self.allocate(index, var.name, _width(var))
            for i, wire in enumerate(wires):
                if (value >> (len(wires) - 1 - i)) & 1:
                    out.mcx(controls, wire)
            if adjoint:
                for wire in wires:
                    out.release(wire)
            else:
                self.wires[stmt.produced_quantum[0].ident] = wires
        elif target == "dup":
            source = self.get(stmt.conserved[0])
            if adjoint:
                wires = self.take(stmt.consumed[0])
            else:
                wires = self.allocate(index, stmt.produced_quantum[0].name, len(source))
            for s, t in zip(source, wires):
                out.mcx(_with(controls, s), t)
            if adjoint:
                for wire in wires:
                    out.release(wire)
            else:
                self.wires[stmt.produced_quantum[0].ident] = wires
        elif target in ("X", "H", "ry"):
            wires = self.take(stmt.consumed[0])
            for wire in wires:
                if target == "X":
                    out.mcx(controls, wire)
                elif target == "H":
                    out.controlled_h(controls, wire)
                else:
                    out.controlled_ry(controls, wire, Fraction(op.static_args[0]))
            self.wires[stmt.produced_quantum[0].ident] = wires
        elif target == "CX":
            source = self.get(stmt.conserved[0])
            wires = self.take(stmt.consumed[0])
            for s, t in _pairs(source, wires):
                out.mcx(_with(controls, s), t)
            self.wires[stmt.produced_quantum[0].ident] = wires
        elif target == "phase":
            out.controlled_phase(controls, Fraction(op.static_args[0]))
        elif target == "measure":
            if controls:
                raise SynthesisError("Measurements cannot be quantum controlled.")
            wires = self.take(stmt.consumed[0])
            if len(wires) == 1:
                measured = wires[0].var
            else:
                joined = out.fresh(stmt.consumed[0].name)
                measured = Var(joined.name, VarKind.QUANTUM, Const(len(wires)))
                out.emit(
                    Statement(
                        op=Operation("cat", (), (len(wires),) + (Const(1),) * len(wires)),
                        produced_quantum=(measured,),
                        consumed=tuple(w.var for w in wires),
                    )
                )
            out.emit(dataclasses.replace(stmt, consumed=(measured,), condition=()))
        elif target == "distribute":
            wires = self.take(stmt.consumed[0])
            for wire in wires:
                wire.refs += 1
            for var in stmt.produced_quantum:
                self.wires[var.ident] = wires
        elif target == "select":
            self.select(stmt, controls)
        elif target == "cat":
            wires = [w for var in stmt.consumed for w in self.take(var)]
            self.wires[stmt.produced_quantum[0].ident] = wires
        elif target == "uncat":
            wires = self.take(stmt.consumed[0])
            start = 0
            for var, width in zip(stmt.produced_quantum, op.static_args[1:]):
                size = width.evaluate({})
                self.wires[var.ident] = wires[start : start + size]
                start += size
        else:
            raise SynthesisError("Cannot decompose '{}'; inline the program first.".format(op))

    def select(self, stmt: Statement, controls: list[_Wire]) -> None:
        out = self.out
        low = self.take(stmt.consumed[0])
        high = self.take(stmt.consumed[1])
        result = stmt.produced_quantum[0]
        if all(a is b for a, b in zip(low, high)) and len(low) == len(high):
            for wire in low:
                wire.refs -= 1
            self.wires[result.ident] = low
            return
        if len(low) != len(high):
            raise SynthesisError("select of {} and {} qubits.".format(len(low), len(high)))
        # The branch that is not selected holds |0>: fold the other into ``low``.
        guard = out.guard
        for a, b in zip(high, low):
            out.mcx(_with(controls, a), b)
        control = stmt.conserved[0]
        if control.is_classical:
            inner = controls
            out.guard = guard + (Literal(control),)
        else:
            (ctl,) = self.get(control)
            inner = _with(controls, ctl)
        for a, b in zip(low, high):
            out.mcx(_with(inner, a), b)
        out.guard = guard
        for wire in high:
            out.release(wire)
        self.wires[result.ident] = low


def _width(var: Var) -> int:
    if var.width is None:
        return 1
    return var.width.evaluate({})


def _with(controls: list[_Wire], wire: _Wire) -> list[_Wire]:
    return controls if wire in controls else controls + [wire]


def _pairs(source: list[_Wire], target: list[_Wire]) -> list[tuple[_Wire, _Wire]]:
    if len(source) == len(target):
        return list(zip(source, target))
    if len(source) == 1:
        return [(source[0], t) for t in target]
    raise SynthesisError("Cannot control {} qubits by {}.".format(len(target), len(source)))


def decompose_controls(f: FunctionDef) -> FunctionDef:
    """Rewrite a flat function into single-qubit gates and CX.

    Quantum conditions become explicit controls: one control gives ``CX``, two the 15 gate
    Toffoli circuit over ``H``, ``CX`` and ``T`` (``phase<pi/4>``), more a chain of Toffolis
    into fresh ancillas. Negated controls are conjugated by ``X``. ``H`` and ``ry`` are
    controlled through ``ry`` rotations around a controlled ``X``. Branch copies of
    ``distribute`` share their qubits; a ``select`` whose branches live on different qubits
    folds them with two controlled copies. Classical conditions are kept on every emitted
    statement.

    Every quantum parameter becomes a consumed parameter split into single qubits; the result
    returns the former conserved parameters first, then the former results.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``f`` still calls user functions, forgets or measures under a quantum
            condition.

    """
    return _Decomposer(f).run()
