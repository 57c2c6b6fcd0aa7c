from __future__ import annotations

from fractions import Fraction
import re

from unfab.exceptions import ParseError
from unfab.ir import format_angle
from unfab.ir import SourceSpan
from unfab.lower._circuit import FlatCircuit
from unfab.lower._circuit import Gate


_HEADER = ("OPENQASM 2.0;", 'include "qelib1.inc";')
_ANGLED = ("u1", "ry")

_DIRECTIVE = re.compile(r"^//\s*(input|output|clbits)\s+(\S+):\s*([\d,]*)$")
_QREG = re.compile(r"^qreg\s+q\[(\d+)\];$")
_CREG = re.compile(r"^creg\s+c\[(\d+)\];$")
_GATE = re.compile(
    r"^(?:if\s*\(\s*c\s*==\s*(\d+)\s*\)\s*)?([a-z0-9]+)(?:\(([^)]*)\))?\s+(.+?)\s*;$"
)
_QUBIT = re.compile(r"^q\[(\d+)\]$")
_MEASURE = re.compile(r"^q\[(\d+)\]\s*->\s*c\[(\d+)\]$")
_ANGLE = re.compile(r"^(-)?(?:(\d+)\s*\*\s*)?pi(?:\s*/\s*(\d+))?$")


def _indices(indices: tuple[int, ...]) -> str:
    return ",".join(str(i) for i in indices)


def _format_gate(gate: Gate) -> str:
    prefix = "" if gate.condition is None else "if(c=={}) ".format(gate.condition)
    if gate.name == "measure":
        return "{}measure q[{}] -> c[{}];".format(prefix, gate.qubits[0], gate.cbit)
    name = gate.name
    if gate.angle is not None:
        name = "{}({})".format(name, format_angle(gate.angle))
    operands = ",".join("q[{}]".format(q) for q in gate.qubits)
    return "{}{} {};".format(prefix, name, operands)


def emit_qasm(circuit: FlatCircuit) -> str:
    """Write ``circuit`` as OpenQASM 2.0.

    The names of the input, output and measured registers are recorded in comments that
    :func:`parse_qasm` reads back; other readers ignore them.
    """
    lines = list(_HEADER)
    for kind, mapping in (
        ("input", circuit.inputs),
        ("output", circuit.outputs),
        ("clbits", circuit.clbits),
    ):
        for name, indices in mapping.items():
            lines.append("// {} {}: {}".format(kind, name, _indices(indices)))
    lines.append("qreg q[{}];".format(circuit.num_qubits))
    if circuit.classical_bits > 0:
        lines.append("creg c[{}];".format(circuit.classical_bits))
    lines.extend(_format_gate(gate) for gate in circuit.gates)
    return "\n".join(lines) + "\n"


def _parse_angle(text: str, span: SourceSpan) -> Fraction:
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return Fraction(int(text))
    match = _ANGLE.match(text)
    if match is None:
        raise ParseError("Cannot read angle '{}'.".format(text), span)
    sign, num, den = match.groups()
    angle = Fraction(int(num or 1), int(den or 1))
    return -angle if sign else angle


def parse_qasm(text: str, file: str = "<qasm>") -> FlatCircuit:
    """Read the OpenQASM 2.0 subset written by :func:`emit_qasm`.

    Raises:
        :exc:`~unfab.exceptions.ParseError`:
            If a line is outside the subset or a gate is malformed.

    """
    circuit: FlatCircuit | None = None
    classical_bits = 0
    names: dict[str, dict[str, tuple[int, ...]]] = {"input": {}, "output": {}, "clbits": {}}
    gates: list[Gate] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        span = SourceSpan(file, number, 1, number, len(raw) + 1)
        if not line or line in _HEADER:
            continue
        if line.startswith("//"):
            match = _DIRECTIVE.match(line)
            if match is not None:
                kind, name, indices = match.groups()
                names[kind][name] = tuple(int(i) for i in indices.split(",") if i)
            continue
        match = _QREG.match(line)
        if match is not None:
            circuit = FlatCircuit(int(match.group(1)))
            continue
        match = _CREG.match(line)
        if match is not None:
            classical_bits = int(match.group(1))
            continue
        match = _GATE.match(line)
        if match is None:
            raise ParseError("Cannot read '{}'.".format(line), span)
        if circuit is None:
            raise ParseError("Gate before the quantum register declaration.", span)
        condition_text, name, angle_text, operands = match.groups()
        condition = None if condition_text is None else int(condition_text)
        try:
            if name == "measure":
                target = _MEASURE.match(operands)
                if target is None:
                    raise ParseError("Cannot read measurement '{}'.".format(operands), span)
                qubit, cbit = target.groups()
                gates.append(Gate("measure", (int(qubit),), cbit=int(cbit), condition=condition))
                continue
            qubits = []
            for operand in operands.split(","):
                found = _QUBIT.match(operand.strip())
                if found is None:
                    raise ParseError("Cannot read operand '{}'.".format(operand), span)
                qubits.append(int(found.group(1)))
            angle = None
            if angle_text is not None:
                angle = _parse_angle(angle_text, span)
            elif name in _ANGLED:
                raise ParseError("Gate '{}' needs an angle.".format(name), span)
            gates.append(Gate(name, tuple(qubits), angle, condition=condition))
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(str(e), span) from None
    if circuit is None:
        raise ParseError("Missing quantum register declaration.")
    circuit.gates = gates
    circuit.classical_bits = classical_bits
    circuit.inputs = names["input"]
    circuit.outputs = names["output"]
    circuit.clbits = names["clbits"]
    try:
        circuit.validate()
    except ValueError as e:
        raise ParseError(str(e)) from None
    return circuit
