from __future__ import annotations

from collections.abc import Mapping
from collections.abc import Sequence
import dataclasses
from fractions import Fraction
from typing import Any
from typing import Union

import numpy as np
from optuna.logging import get_logger

from unfab.census import CallCensus
from unfab.exceptions import ForgetViolationError
from unfab.exceptions import UnresolvedClassicalError
from unfab.ir import angle_radians
from unfab.ir import FunctionDef
from unfab.ir import merges
from unfab.ir import Operation
from unfab.ir import Program
from unfab.ir import splits
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir import VarKind
from unfab.pipeline import derive
from unfab.sim._register import H_MATRIX
from unfab.sim._register import QubitRegister
from unfab.sim._register import ry_matrix
from unfab.sim._register import X_MATRIX
from unfab.sim._state import SimConfig
from unfab.sim._state import StateVector


_logger = get_logger(__name__)

_Ident = tuple[VarKind, str]
_Control = tuple[int, int]
# Quantum values are qubit ids, classical values integers and garbage values stacks whose
# items are qubit ids or nested stacks.
_Value = Union[tuple[int, ...], int, list]


@dataclasses.dataclass
class SimulationResult:
    """Outcome of :func:`simulate`.

    Args:
        state:
            Final state over the conserved parameters, the returned quantum variables, the
            qubits held in returned garbage (named ``<var>.<k>``) and untouched input wires.
        classical:
            Returned classical values by variable name.
        garbage:
            Structure of every returned garbage variable: nested lists of wire names of
            ``state``.
        census:
            Calls made while simulating.

    """

    state: StateVector
    classical: dict[str, int]
    garbage: dict[str, list]
    census: CallCensus


@dataclasses.dataclass
class _Frame:
    function: FunctionDef
    values: dict[_Ident, _Value]
    controls: list[_Control]
    bin: list = dataclasses.field(default_factory=list)

    def env(self) -> dict[str, int]:
        return {
            name: value
            for (kind, name), value in self.values.items()
            if kind is VarKind.CLASSICAL and isinstance(value, int)
        }


class _Interpreter:
    def __init__(
        self,
        register: QubitRegister,
        program: Program | None,
        root: FunctionDef,
        rng: np.random.Generator,
    ) -> None:
        self.register = register
        self.program = program
        self.root = root
        self.rng = rng
        self.refcount: dict[int, int] = {}
        self.census = CallCensus()

    def resolve(self, op: Operation) -> FunctionDef:
        if self.program is None:
            if op.target == self.root.name and op.modes == self.root.modes:
                return self.root
            raise ValueError("Unresolved callee '{}'.".format(op))
        return derive(self.program, op.key)

    def run(self, frame: _Frame) -> None:
        for stmt in frame.function.body:
            controls = self.controls(frame, stmt)
            if controls is None:
                continue
            if stmt.op.is_builtin:
                self.builtin(frame, stmt, controls)
            else:
                self.call(frame, stmt, controls)

    def controls(self, frame: _Frame, stmt: Statement) -> list[_Control] | None:
        controls = list(frame.controls)
        for literal in stmt.condition:
            value = frame.values[literal.var.ident]
            if literal.var.is_classical:
                assert isinstance(value, int)
                if bool(value) == literal.negated:
                    return None
                continue
            assert isinstance(value, tuple)
            if literal.negated:
                if len(value) != 1:
                    raise ValueError("Negated condition on register {}.".format(literal.var))
                controls.append((value[0], 0))
            else:
                controls.extend((q, 1) for q in value)
        return controls

    def take(self, frame: _Frame, var: Var) -> Any:
        return frame.values.pop(var.ident)

    def wire(self, frame: _Frame, var: Var) -> tuple[int, ...]:
        value = frame.values[var.ident]
        assert isinstance(value, tuple)
        return value

    def width(self, frame: _Frame, var: Var) -> int:
        if var.width is None:
            return 1
        try:
            return var.width.evaluate(frame.env())
        except KeyError as e:
            raise UnresolvedClassicalError(str(e)) from None

    def allocate(self, count: int) -> tuple[int, ...]:
        ids = self.register.allocate(count)
        for qubit in ids:
            self.refcount[qubit] = 1
        return ids

    def free(self, ids: Sequence[int], controls: Sequence[_Control]) -> None:
        self.register.assert_zero(ids, controls)
        for qubit in ids:
            self.refcount[qubit] -= 1
            if self.refcount[qubit] == 0:
                del self.refcount[qubit]
                self.register.release([qubit])

    def flip_bits(self, ids: Sequence[int], value: int, controls: Sequence[_Control]) -> None:
        for i, qubit in enumerate(ids):
            if (value >> (len(ids) - 1 - i)) & 1:
                self.register.apply(X_MATRIX, qubit, controls)

    def copy_bits(
        self, source: Sequence[int], target: Sequence[int], controls: Sequence[_Control]
    ) -> None:
        if len(source) == len(target):
            pairs = list(zip(source, target))
        elif len(source) == 1:
            pairs = [(source[0], t) for t in target]
        else:
            raise ValueError("Cannot control {} qubits by {}.".format(len(target), len(source)))
        for s, t in pairs:
            self.register.apply(X_MATRIX, t, list(controls) + [(s, 1)])

    def builtin(self, frame: _Frame, stmt: Statement, controls: list[_Control]) -> None:
        op = stmt.op
        flipped = op.flip_count() % 2 == 1
        if op.is_("dispose"):
            if flipped:
                frame.values[stmt.produced_quantum[0].ident] = frame.bin.pop()
            else:
                frame.bin.append(self.take(frame, stmt.consumed[0]))
            return
        for var in stmt.consumed:
            if var.is_garbage:
                self.take(frame, var)
        ins = [v for v in stmt.consumed if not v.is_garbage]
        outs = [v for v in stmt.produced_quantum if not v.is_garbage]
        result = self.dispatch(frame, stmt, op, flipped, ins, outs, controls)
        for var, value in zip(outs, result):
            frame.values[var.ident] = value
        for var in stmt.produced_quantum:
            if var.is_garbage:
                frame.values[var.ident] = []

    def dispatch(
        self,
        frame: _Frame,
        stmt: Statement,
        op: Operation,
        flipped: bool,
        ins: list[Var],
        outs: list[Var],
        controls: list[_Control],
    ) -> list[tuple[int, ...]]:
        target = op.target
        sign = -1 if flipped else 1
        if target == "calc":
            expr = op.static_args[0]
            try:
                value = int(expr.evaluate(frame.env()))
            except KeyError as e:
                raise UnresolvedClassicalError(str(e)) from None
            frame.values[stmt.produced_classical[0].ident] = value
            return []
        if target == "new":
            value = int(op.static_args[0])
            if flipped:
                ids = self.take(frame, ins[0])
                self.flip_bits(ids, value, controls)
                self.free(ids, controls)
                return []
            ids = self.allocate(self.width(frame, outs[0]))
            self.flip_bits(ids, value, controls)
            return [ids]
        if target in ("X", "H", "ry"):
            ids = self.take(frame, ins[0])
            if target == "X":
                matrix = X_MATRIX
            elif target == "H":
                matrix = H_MATRIX
            else:
                matrix = ry_matrix(sign * angle_radians(Fraction(op.static_args[0])))
            for qubit in ids:
                self.register.apply(matrix, qubit, controls)
            return [ids]
        if target == "CX":
            ids = self.take(frame, ins[0])
            self.copy_bits(self.wire(frame, stmt.conserved[0]), ids, controls)
            return [ids]
        if target == "phase":
            self.register.apply_phase(sign * angle_radians(Fraction(op.static_args[0])), controls)
            return []
        if target == "measure":
            if len(controls) > 0:
                raise ValueError("Measurements cannot be quantum controlled.")
            ids = self.take(frame, ins[0])
            for qubit in ids:
                self.refcount.pop(qubit, None)
            value = self.register.measure(ids, self.rng)
            frame.values[stmt.produced_classical[0].ident] = value
            return []
        if target == "forget":
            for var in ins:
                self.forget(frame, var)
            return []
        if target == "dup":
            source = self.wire(frame, stmt.conserved[0])
            if flipped:
                ids = self.take(frame, ins[0])
                self.copy_bits(source, ids, controls)
                self.free(ids, controls)
                return []
            ids = self.allocate(len(source))
            self.copy_bits(source, ids, controls)
            return [ids]
        if target in ("select", "distribute"):
            return self.route(frame, stmt, ins, controls)
        if target in ("cat", "uncat"):
            joining = (target == "cat") != flipped
            if joining:
                return [tuple(q for var in ins for q in self.take(frame, var))]
            ids = self.take(frame, ins[0])
            env = frame.env()
            parts = []
            start = 0
            for width in op.static_args[1:]:
                size = width.evaluate(env)
                parts.append(ids[start : start + size])
                start += size
            return parts
        raise ValueError("Cannot simulate '{}'.".format(op))

    def route(
        self, frame: _Frame, stmt: Statement, ins: list[Var], controls: list[_Control]
    ) -> list[tuple[int, ...]]:
        control = stmt.conserved[0]
        splitting = splits(stmt.op)
        assert splitting or merges(stmt.op)
        if control.is_classical:
            slot = 1 if frame.values[control.ident] else 0
            if splitting:
                ids = self.take(frame, ins[0])
                return [ids, ()] if slot == 0 else [(), ids]
            other = ins[1 - slot]
            if other.ident in frame.values:
                self.free(self.take(frame, other), controls)
            return [self.take(frame, ins[slot])]
        if splitting:
            ids = self.take(frame, ins[0])
            for qubit in ids:
                self.refcount[qubit] += 1
            return [ids, ids]
        low = self.take(frame, ins[0])
        high = self.take(frame, ins[1])
        if low == high:
            for qubit in low:
                self.refcount[qubit] -= 1
            return [low]
        (ctl,) = self.wire(frame, control)
        self.copy_bits(high, low, controls)
        self.copy_bits(low, high, list(controls) + [(ctl, 1)])
        self.free(high, controls)
        return [low]

    def forget(self, frame: _Frame, var: Var) -> None:
        ids = self.take(frame, var)
        self.census.record_forget()
        if any(self.refcount[q] > 1 for q in ids):
            for qubit in ids:
                self.refcount[qubit] -= 1
            return
        if not self.register.erase(ids):
            raise ForgetViolationError(
                "forget({}) in '{}' merges distinct basis vectors.".format(
                    var, frame.function.name
                )
            )
        for qubit in ids:
            del self.refcount[qubit]

    def call(self, frame: _Frame, stmt: Statement, controls: list[_Control]) -> None:
        callee = self.resolve(stmt.op)
        self.census.record(stmt.op.key)
        inner = _Frame(callee, {}, controls)
        k = len(callee.classical_in)
        for param, arg in zip(callee.classical_in, stmt.conserved[:k]):
            inner.values[param.ident] = frame.values[arg.ident]
        for param, arg in zip(callee.conserved_params, stmt.conserved[k:]):
            inner.values[param.ident] = frame.values[arg.ident]
        for param, arg in zip(callee.consumed_params, stmt.consumed):
            inner.values[param.ident] = self.take(frame, arg)
        self.bind_bin(inner)
        self.run(inner)
        for ret, out in zip(callee.returned_classical, stmt.produced_classical):
            frame.values[out.ident] = inner.values[ret.ident]
        for ret, out in zip(callee.returned_quantum, stmt.produced_quantum):
            frame.values[out.ident] = inner.values.pop(ret.ident)

    def bind_bin(self, frame: _Frame) -> None:
        f = frame.function
        if f.bin is None:
            return
        value = frame.values.setdefault(f.bin.ident, [])
        assert isinstance(value, list)
        frame.bin = value


def _flatten_garbage(
    name: str, value: list, wires: dict[str, Sequence[int]], counter: list[int]
) -> list:
    structure: list = []
    for item in value:
        if isinstance(item, list):
            structure.append(_flatten_garbage(name, item, wires, counter))
        else:
            wire = "{}.{}".format(name, counter[0])
            counter[0] += 1
            wires[wire] = item
            structure.append(wire)
    return structure


def _load_garbage(structure: Any, wires: Mapping[str, Sequence[int]], used: set[str]) -> Any:
    if isinstance(structure, list):
        return [_load_garbage(item, wires, used) for item in structure]
    used.add(structure)
    return tuple(wires[structure])


def input_registers(
    f: FunctionDef, classical: Mapping[str, int] | None = None
) -> list[tuple[str, int]]:
    """Names and widths of the quantum parameters of ``f``, in declaration order."""
    env = dict(classical or {})
    registers = []
    for var in f.conserved_params + f.consumed_params:
        if var.is_quantum:
            width = 1 if var.width is None else var.width.evaluate(env)
            registers.append((var.name, width))
    return registers


def simulate(
    f: FunctionDef,
    state: StateVector | None = None,
    config: SimConfig | None = None,
    *,
    program: Program | None = None,
    classical: Mapping[str, int] | None = None,
    garbage: Mapping[str, Any] | None = None,
) -> SimulationResult:
    """Run ``f`` on ``state``.

    Calls to other functions, in any mode, are resolved through ``program`` and derived on
    demand, so ``program`` should be one returned by :func:`~unfab.pipeline.prepare` whenever
    ``f`` calls derived functions. ``forget`` erases its argument from the basis labels and
    fails when that is not a unitary operation.

    Args:
        f:
            The function to run.
        state:
            Input state; registers are matched to the quantum parameters by name, and extra
            registers pass through unchanged. Defaults to all parameters in ``|0>``.
        config:
            Budget, seed and tolerance.
        program:
            Program resolving calls.
        classical:
            Values of the classical parameters.
        garbage:
            Values of garbage parameters, as returned in :attr:`SimulationResult.garbage`.

    Returns:
        The final state, the classical results and the call census.

    Raises:
        :exc:`~unfab.exceptions.UnnewViolationError`:
            If a deallocated qubit is not in the asserted state.
        :exc:`~unfab.exceptions.BudgetExceededError`:
            If more than ``config.max_qubits`` qubits are live at once.
        :exc:`~unfab.exceptions.ForgetViolationError`:
            If a ``forget`` is not unitary on the reached state.
        :exc:`~unfab.exceptions.UnresolvedClassicalError`:
            If a classical parameter is missing.

    """
    config = config or SimConfig()
    classical = dict(classical or {})
    if state is None:
        state = StateVector.from_registers(input_registers(f, classical))
    register, wires = QubitRegister.from_state(state, config)
    interpreter = _Interpreter(register, program, f, np.random.default_rng(config.seed))
    frame = _Frame(f, {}, [])
    used: set[str] = set()
    for var in f.classical_in:
        if var.name not in classical:
            raise UnresolvedClassicalError("Missing classical argument ${}.".format(var.name))
        frame.values[var.ident] = int(classical[var.name])
    for var in f.conserved_params + f.consumed_params:
        if var.is_garbage:
            structure = (garbage or {}).get(var.name, [])
            frame.values[var.ident] = _load_garbage(structure, wires, used)
        else:
            frame.values[var.ident] = wires[var.name]
            used.add(var.name)
    for qubits in wires.values():
        for qubit in qubits:
            interpreter.refcount[qubit] = 1
    interpreter.bind_bin(frame)
    interpreter.run(frame)

    out_wires: dict[str, Sequence[int]] = {}
    garbage_out: dict[str, list] = {}
    for var in f.conserved_params:
        out_wires[var.name] = wires[var.name]
    for var in f.returned_quantum:
        value = frame.values[var.ident]
        if var.is_garbage:
            assert isinstance(value, list)
            garbage_out[var.name] = _flatten_garbage(var.name, value, out_wires, [0])
        else:
            assert isinstance(value, tuple)
            out_wires[var.name] = value
    for name, qubits in wires.items():
        if name not in used:
            out_wires[name] = qubits
    values = {var.name: frame.values[var.ident] for var in f.returned_classical}
    _logger.debug(
        "Simulated {}: {} calls, {} forgets.".format(
            f.key, interpreter.census.total(), interpreter.census.forgets
        )
    )
    return SimulationResult(
        state=register.to_state(out_wires),
        classical={k: int(v) for k, v in values.items() if isinstance(v, int)},
        garbage=garbage_out,
        census=interpreter.census,
    )
