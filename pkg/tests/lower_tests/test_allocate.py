from __future__ import annotations

from fractions import Fraction

import pytest

from unfab.exceptions import ParseError
from unfab.exceptions import SynthesisError
from unfab.lower import allocate_registers
from unfab.lower import decompose_controls
from unfab.lower import emit_qasm
from unfab.lower import FlatCircuit
from unfab.lower import Gate
from unfab.lower import gate_count
from unfab.lower import GateCount
from unfab.lower import parse_qasm
from unfab.textfmt import parse_function


def test_released_qubits_are_reused() -> None:
    f = parse_function(
        """
        f(a) :=p {
          b :=p new1
          :=p unnew1(b)
          c :=p new0
          a' :=p CX[c](a)
          :=p unnew0(c)
        } > a'
        """
    )
    circuit = allocate_registers(f)
    assert circuit.num_qubits == 2
    assert circuit.inputs == {"a": (0,)}
    assert circuit.outputs == {"a'": (0,)}
    assert [(g.name, g.qubits) for g in circuit.gates] == [
        ("x", (1,)),
        ("x", (1,)),
        ("cx", (1, 0)),
    ]


def test_named_phases() -> None:
    f = parse_function("f[a] :=q { :=q phase<pi/4> if a; :=q phase<-pi/4> if a } >")
    circuit = allocate_registers(decompose_controls(f))
    assert [g.name for g in circuit.gates] == ["t", "tdg"]
    f = parse_function("f[a] :=q { :=q phase<pi/2> if a } >")
    (gate,) = allocate_registers(f).gates
    assert (gate.name, gate.angle) == ("u1", Fraction(1, 2))


def test_quantum_controls_must_be_decomposed() -> None:
    f = parse_function("f[a](b) :=p { b' :=p X(b) if a } > b'")
    with pytest.raises(SynthesisError, match="Decompose"):
        allocate_registers(f)


def test_classical_conditions_follow_measurements() -> None:
    f = parse_function(
        """
        f(a, b) :=m {
          $m :=m measure(a)
          b' :=p X(b) if $m
          b'' :=p X(b') if !$m
        } > b'', $m
        """
    )
    circuit = allocate_registers(f)
    assert circuit.classical_bits == 1
    assert circuit.clbits == {"m": (0,)}
    assert [(g.name, g.condition) for g in circuit.gates] == [
        ("measure", None),
        ("x", 1),
        ("x", 0),
    ]


def test_gate_count() -> None:
    circuit = FlatCircuit(
        3, [Gate("h", (0,)), Gate("cx", (0, 1)), Gate("t", (2,)), Gate("measure", (0,), cbit=0)]
    )
    assert gate_count(circuit) == GateCount(single=2, cx=1, total=3, qubits=3)
    assert gate_count(circuit).to_records() == ["single=2", "cx=1", "total=3", "qubits=3"]
    with pytest.raises(ValueError, match="Toffoli"):
        gate_count(FlatCircuit(3, [Gate("ccx", (0, 1, 2))]))


@pytest.mark.parametrize(
    "name, qubits",
    [("cx", (0,)), ("cx", (1, 1)), ("nope", (0,))],
)
def test_gate_validation(name: str, qubits: tuple[int, ...]) -> None:
    with pytest.raises(ValueError):
        Gate(name, qubits)


def test_emit_qasm() -> None:
    circuit = FlatCircuit(
        2,
        [
            Gate("h", (0,)),
            Gate("ry", (1,), Fraction(-3, 4)),
            Gate("measure", (0,), cbit=0),
            Gate("x", (1,), condition=1),
        ],
        classical_bits=1,
        inputs={"a": (0,), "b": (1,)},
        outputs={"b'": (1,)},
        clbits={"m": (0,)},
    )
    text = emit_qasm(circuit)
    assert text.splitlines() == [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        "// input a: 0",
        "// input b: 1",
        "// output b': 1",
        "// clbits m: 0",
        "qreg q[2];",
        "creg c[1];",
        "h q[0];",
        "ry(-3*pi/4) q[1];",
        "measure q[0] -> c[0];",
        "if(c==1) x q[1];",
    ]
    assert parse_qasm(text) == circuit


@pytest.mark.parametrize(
    "text, message",
    [
        ("h q[0];", "before"),
        ("qreg q[1];\nfoo bar;", "Cannot read"),
        ("qreg q[1];\nry q[0];", "angle"),
        ("qreg q[1];\nh q[3];", "out of range"),
        ("", "Missing"),
    ],
)
def test_parse_qasm_errors(text: str, message: str) -> None:
    with pytest.raises(ParseError, match=message):
        parse_qasm(text)
