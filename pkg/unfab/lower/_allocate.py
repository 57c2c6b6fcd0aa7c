from __future__ import annotations

import dataclasses
from fractions import Fraction
import heapq

from optuna.logging import get_logger

from unfab.exceptions import SynthesisError
from unfab.ir import FunctionDef
from unfab.ir import Literal
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir import VarKind
from unfab.lower._circuit import FlatCircuit
from unfab.lower._circuit import Gate


_logger = get_logger(__name__)

_Ident = tuple[VarKind, str]

_NAMED_PHASES = {Fraction(1, 4): "t", Fraction(-1, 4): "tdg"}


@dataclasses.dataclass
class AllocatorState:
    """Linear-scan register state.

    Args:
        free_list:
            Released qubit indices; the lowest one is reused first.
        live:
            Qubit indices held by each live variable.
        alias_hints:
            Pairs of variable names that share qubits because they are branch copies.
        num_qubits:
            Qubits used so far.
        measured:
            Measured qubits, which are never reused.

    """

    free_list: list[int] = dataclasses.field(default_factory=list)
    live: dict[_Ident, tuple[int, ...]] = dataclasses.field(default_factory=dict)
    alias_hints: list[tuple[str, str]] = dataclasses.field(default_factory=list)
    num_qubits: int = 0
    measured: set[int] = dataclasses.field(default_factory=set)

    def allocate(self) -> int:
        if self.free_list:
            return heapq.heappop(self.free_list)
        self.num_qubits += 1
        return self.num_qubits - 1

    def release(self, index: int) -> None:
        for ident, held in self.live.items():
            if index in held:
                raise SynthesisError(
                    "Qubit {} is released while {} holds it.".format(index, ident[1])
                )
        heapq.heappush(self.free_list, index)

    def bind(self, var: Var, indices: tuple[int, ...]) -> None:
        self.live[var.ident] = indices

    def take(self, var: Var) -> tuple[int, ...]:
        try:
            return self.live.pop(var.ident)
        except KeyError:
            raise SynthesisError("{} is not live.".format(var)) from None

    def get(self, var: Var) -> tuple[int, ...]:
        try:
            return self.live[var.ident]
        except KeyError:
            raise SynthesisError("{} is not live.".format(var)) from None


class _Allocator:
    def __init__(self, f: FunctionDef) -> None:
        self.f = f
        self.state = AllocatorState()
        self.gates: list[Gate] = []
        self.clbits: dict[str, tuple[int, ...]] = {}
        self.classical_bits = 0
        self.guards: list[int | None] = [None]

    def guard_values(self, literals: list[Literal]) -> list[int | None]:
        # Every value of the bits measured so far that satisfies the literals.
        if not literals:
            return [None]
        bits = []
        for literal in literals:
            try:
                bits.append((self.clbits[literal.var.name], literal.negated))
            except KeyError:
                raise SynthesisError(
                    "Condition on {} before it is measured.".format(literal.var)
                ) from None
        values = []
        for value in range(1 << self.classical_bits):
            if all(any((value >> b) & 1 for b in held) != negated for held, negated in bits):
                values.append(value)
        return values

    def gate(self, name: str, qubits: tuple[int, ...], angle: Fraction | None = None) -> None:
        for condition in self.guards:
            self.gates.append(Gate(name, qubits, angle, condition=condition))

    def run(self) -> FlatCircuit:
        f = self.f
        state = self.state
        inputs: dict[str, tuple[int, ...]] = {}
        for var in f.conserved_params + f.consumed_params:
            indices = tuple(state.allocate() for _ in range(_width(var)))
            state.bind(var, indices)
            inputs[var.name] = indices
        for stmt in f.body:
            self.statement(stmt)
        outputs = {var.name: state.get(var) for var in f.conserved_params}
        for var in f.returned_quantum:
            outputs[var.name] = state.take(var)
        circuit = FlatCircuit(
            num_qubits=state.num_qubits,
            gates=self.gates,
            classical_bits=self.classical_bits,
            inputs=inputs,
            outputs=outputs,
            clbits=dict(self.clbits),
        )
        circuit.validate()
        _logger.debug(
            "Allocated {} qubits and {} gates for {}.".format(
                circuit.num_qubits, len(circuit.gates), f.key
            )
        )
        return circuit

    def statement(self, stmt: Statement) -> None:
        state = self.state
        op = stmt.op
        target = op.target
        quantum = [lit for lit in stmt.condition if lit.var.is_quantum]
        self.guards = self.guard_values([lit for lit in stmt.condition if lit.var.is_classical])
        if quantum and target != "phase":
            raise SynthesisError("Decompose the controls of '{}' first.".format(stmt))
        if target == "calc":
            return
        if target == "new":
            value = int(op.static_args[0])
            if op.modes:
                indices = state.take(stmt.consumed[0])
            else:
                indices = tuple(state.allocate() for _ in range(_width(stmt.produced_quantum[0])))
            for i, index in enumerate(indices):
                if (value >> (len(indices) - 1 - i)) & 1:
                    self.gate("x", (index,))
            if op.modes:
                for index in indices:
                    state.release(index)
            else:
                state.bind(stmt.produced_quantum[0], indices)
        elif target in ("X", "H", "ry"):
            indices = state.take(stmt.consumed[0])
            angle = Fraction(op.static_args[0]) if target == "ry" else None
            for index in indices:
                self.gate(target.lower(), (index,), angle)
            state.bind(stmt.produced_quantum[0], indices)
        elif target == "CX":
            source = state.get(stmt.conserved[0])
            indices = state.take(stmt.consumed[0])
            if len(source) == 1:
                source = source * len(indices)
            if len(source) != len(indices):
                raise SynthesisError("Width mismatch in '{}'.".format(stmt))
            for s, t in zip(source, indices):
                self.gate("cx", (s, t))
            state.bind(stmt.produced_quantum[0], indices)
        elif target == "phase":
            if not quantum:
                return
            if len(quantum) != 1 or quantum[0].negated:
                raise SynthesisError("Decompose the controls of '{}' first.".format(stmt))
            angle = Fraction(op.static_args[0])
            for index in state.get(quantum[0].var):
                if angle in _NAMED_PHASES:
                    self.gate(_NAMED_PHASES[angle], (index,))
                else:
                    self.gate("u1", (index,), angle)
        elif target == "measure":
            indices = state.take(stmt.consumed[0])
            cbits = tuple(range(self.classical_bits, self.classical_bits + len(indices)))
            self.classical_bits += len(indices)
            for index, cbit in zip(indices, cbits):
                for condition in self.guards:
                    self.gates.append(Gate("measure", (index,), cbit=cbit, condition=condition))
                state.measured.add(index)
            self.clbits[stmt.produced_classical[0].name] = cbits
        elif target == "distribute":
            indices = state.take(stmt.consumed[0])
            for var in stmt.produced_quantum:
                state.bind(var, indices)
            a, b = stmt.produced_quantum
            state.alias_hints.append((a.name, b.name))
        elif target == "select":
            low = state.take(stmt.consumed[0])
            high = state.take(stmt.consumed[1])
            if low != high:
                raise SynthesisError("Branches of '{}' do not share qubits.".format(stmt))
            state.bind(stmt.produced_quantum[0], low)
        elif target == "cat":
            joined = tuple(i for var in stmt.consumed for i in state.take(var))
            state.bind(stmt.produced_quantum[0], joined)
        elif target == "uncat":
            indices = state.take(stmt.consumed[0])
            start = 0
            for var, width in zip(stmt.produced_quantum, op.static_args[1:]):
                size = width.evaluate({})
                state.bind(var, indices[start : start + size])
                start += size
        else:
            raise SynthesisError("Cannot allocate '{}'; decompose it first.".format(stmt))


def _width(var: Var) -> int:
    if var.width is None:
        return 1
    return var.width.evaluate({})


def allocate_registers(f: FunctionDef) -> FlatCircuit:
    """Map the variables of a decomposed function to qubit indices by linear scan.

    Parameters take the first indices in declaration order. Allocations reuse the lowest
    released index; measured qubits are never reused. Branch copies and ``cat``/``uncat``
    only rename indices. Classically conditioned statements are emitted once per value of
    the classical register that satisfies the condition over the bits measured so far; bit
    ``j`` of the register is ``c[j]`` and measurements take the next free bits.

    Args:
        f:
            A function returned by :func:`~unfab.lower.decompose_controls`.

    Returns:
        The circuit. Its ``inputs`` and ``outputs`` map parameter and returned variable names
        to qubit indices, and ``clbits`` maps measured variables to classical bits.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If a statement still needs decomposition, or a qubit is released while a live
            variable holds it.

    """
    return _Allocator(f).run()
