from __future__ import annotations

import dataclasses

import numpy as np

from unfab.exceptions import UnnewViolationError
from unfab.ir import angle_radians
from unfab.lower._circuit import FlatCircuit
from unfab.sim._register import H_MATRIX
from unfab.sim._register import QubitRegister
from unfab.sim._register import ry_matrix
from unfab.sim._register import X_MATRIX
from unfab.sim._state import SimConfig
from unfab.sim._state import StateVector


_T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)


@dataclasses.dataclass
class CircuitResult:
    state: StateVector
    creg: int
    classical: dict[str, int]


def simulate_circuit(
    circuit: FlatCircuit, state: StateVector | None = None, config: SimConfig | None = None
) -> CircuitResult:
    """Run ``circuit`` and return the state of its output registers.

    Args:
        circuit:
            The circuit.
        state:
            Values of the input registers, matched by name to ``circuit.inputs``; qubits that
            are not inputs start in ``|0>``.
        config:
            Budget, seed and tolerance.

    Returns:
        The state over ``circuit.outputs``, the final classical register (bit ``j`` of the
        register is ``c[j]``) and the measured values by name.

    Raises:
        :exc:`~unfab.exceptions.UnnewViolationError`:
            If a qubit that is neither an output nor measured is not returned to ``|0>``.

    """
    config = config or SimConfig()
    rng = np.random.default_rng(config.seed)
    register = QubitRegister(config)
    qubits = register.allocate(circuit.num_qubits)
    if state is not None:
        _load_inputs(register, circuit, state)
    creg = 0
    measured: dict[int, int] = {}
    for gate in circuit.gates:
        if gate.condition is not None and creg != gate.condition:
            continue
        if gate.name == "measure":
            bit = _measure(register, qubits[gate.qubits[0]], rng)
            measured[gate.qubits[0]] = bit
            assert gate.cbit is not None
            creg = (creg & ~(1 << gate.cbit)) | (bit << gate.cbit)
            continue
        *controls, target = [qubits[q] for q in gate.qubits]
        pairs = [(c, 1) for c in controls]
        if gate.name in ("x", "cx", "ccx"):
            register.apply(X_MATRIX, target, pairs)
        elif gate.name == "h":
            register.apply(H_MATRIX, target, pairs)
        elif gate.name == "t":
            register.apply(_T, target, pairs)
        elif gate.name == "tdg":
            register.apply(_T.conj(), target, pairs)
        elif gate.name == "u1":
            assert gate.angle is not None
            register.apply(np.diag([1, np.exp(1j * angle_radians(gate.angle))]), target, pairs)
        elif gate.name == "ry":
            assert gate.angle is not None
            register.apply(ry_matrix(angle_radians(gate.angle)), target, pairs)
    out = {name: tuple(qubits[q] for q in idx) for name, idx in circuit.outputs.items()}
    kept = {q for idx in out.values() for q in idx}
    for index, qubit in enumerate(qubits):
        if qubit in kept:
            continue
        value = measured.get(index, 0)
        if register.mass(qubit, 1 - value) > config.tolerance:
            raise UnnewViolationError(
                "Qubit {} is not in the expected state |{}>.".format(index, value)
            )
        register.project(qubit, value)
    classical = {
        name: _bits_value(creg, bits) for name, bits in sorted(circuit.clbits.items())
    }
    return CircuitResult(register.to_state(out), creg, classical)


def _bits_value(creg: int, bits: tuple[int, ...]) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | ((creg >> bit) & 1)
    return value


def _measure(register: QubitRegister, qubit: int, rng: np.random.Generator) -> int:
    p1 = register.mass(qubit, 1)
    bit = 1 if rng.random() < p1 else 0
    register.collapse(qubit, bit)
    return bit


def _load_inputs(register: QubitRegister, circuit: FlatCircuit, state: StateVector) -> None:
    names = [name for name in circuit.inputs if name in state.wires]
    if sorted(names) != sorted(state.wires):
        raise ValueError(
            "Input registers {} do not match circuit inputs {}.".format(
                sorted(state.wires), sorted(circuit.inputs)
            )
        )
    ordered = state.reordered(names)
    targets = [q for name in names for q in circuit.inputs[name]]
    register.load(targets, ordered.amplitudes)
