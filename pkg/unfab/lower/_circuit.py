from __future__ import annotations

import dataclasses
from fractions import Fraction


SINGLE_QUBIT_GATES = ("x", "h", "t", "tdg", "u1", "ry")
_ARITY = {"x": 1, "h": 1, "t": 1, "tdg": 1, "u1": 1, "ry": 1, "cx": 2, "ccx": 3, "measure": 1}


@dataclasses.dataclass(frozen=True)
class Gate:
    """One gate of a :class:`FlatCircuit`.

    Args:
        name:
            ``x``, ``h``, ``t``, ``tdg``, ``u1``, ``ry``, ``cx``, ``ccx`` or ``measure``.
        qubits:
            Qubit indices, controls first.
        angle:
            Angle of ``u1``/``ry`` as a multiple of pi.
        cbit:
            Target classical bit of ``measure``.
        condition:
            Value the classical register must hold for the gate to run.

    """

    name: str
    qubits: tuple[int, ...]
    angle: Fraction | None = None
    cbit: int | None = None
    condition: int | None = None

    def __post_init__(self) -> None:
        if self.name not in _ARITY:
            raise ValueError("Unknown gate '{}'.".format(self.name))
        if len(self.qubits) != _ARITY[self.name]:
            raise ValueError(
                "Gate '{}' acts on {} qubits, got {}.".format(
                    self.name, _ARITY[self.name], len(self.qubits)
                )
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("Gate '{}' repeats a qubit: {}.".format(self.name, self.qubits))


@dataclasses.dataclass
class FlatCircuit:
    """Gate list over one quantum and one classical register.

    ``inputs`` and ``outputs`` name the qubits holding the parameters and the results of the
    lowered function, so circuit simulations can be compared with IR simulations.
    """

    num_qubits: int
    gates: list[Gate] = dataclasses.field(default_factory=list)
    classical_bits: int = 0
    inputs: dict[str, tuple[int, ...]] = dataclasses.field(default_factory=dict)
    outputs: dict[str, tuple[int, ...]] = dataclasses.field(default_factory=dict)
    clbits: dict[str, tuple[int, ...]] = dataclasses.field(default_factory=dict)

    def validate(self) -> None:
        for gate in self.gates:
            for qubit in gate.qubits:
                if not 0 <= qubit < self.num_qubits:
                    raise ValueError("Qubit {} out of range in {}.".format(qubit, gate))
            if gate.cbit is not None and not 0 <= gate.cbit < self.classical_bits:
                raise ValueError("Classical bit {} out of range.".format(gate.cbit))


@dataclasses.dataclass(frozen=True)
class GateCount:
    single: int
    cx: int
    total: int
    qubits: int

    def to_records(self) -> list[str]:
        return ["{}={}".format(k, v) for k, v in dataclasses.asdict(self).items()]


def gate_count(circuit: FlatCircuit) -> GateCount:
    """Count single-qubit and CX gates; measurements are not gates."""
    single = sum(1 for g in circuit.gates if g.name in SINGLE_QUBIT_GATES)
    cx = sum(1 for g in circuit.gates if g.name == "cx")
    if any(g.name == "ccx" for g in circuit.gates):
        raise ValueError("Decompose Toffoli gates before counting.")
    return GateCount(single=single, cx=cx, total=single + cx, qubits=circuit.num_qubits)
