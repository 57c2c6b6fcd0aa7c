from __future__ import annotations

import numpy as np
import pytest

from unfab.exceptions import FuelExhaustedError
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.lower import emit_qasm
from unfab.lower import gate_count
from unfab.lower import GateCount
from unfab.lower import lower_entry
from unfab.lower import LowerConfig
from unfab.lower import parse_qasm
from unfab.pipeline import derive
from unfab.pipeline import prepare
from unfab.sim import equiv_up_to_phase
from unfab.sim import input_registers
from unfab.sim import SimConfig
from unfab.sim import simulate
from unfab.sim import simulate_circuit
from unfab.sim import StateVector
from unfab.testing import CORPUS
from unfab.testing import CorpusCase
from unfab.testing import load_program
from unfab.textfmt import parse_program


def test_epr_circuit() -> None:
    circuit = lower_entry(prepare(load_program("epr")), "EPR")
    assert [(g.name, g.qubits) for g in circuit.gates] == [("h", (0,)), ("cx", (0, 1))]
    assert gate_count(circuit) == GateCount(single=1, cx=1, total=2, qubits=2)
    assert circuit.inputs == {"a": (0,), "b": (1,)}
    assert circuit.outputs == {"a'": (0,), "b'": (1,)}


TOFFOLI = """
tof[a, b](c) :=p {
  c0, c1 :=p distribute[a](c)
  c10, c11 :=p distribute[b](c1) if a
  c11' :=p X(c11) if a && b
  c1' :=p select[b](c10, c11') if a
  c' :=p select[a](c0, c1')
} > c'
"""


def test_toffoli_circuit() -> None:
    program = prepare(parse_program(TOFFOLI))
    circuit = lower_entry(program, "tof")
    assert gate_count(circuit) == GateCount(single=9, cx=6, total=15, qubits=3)
    assert {g.name for g in circuit.gates} == {"h", "cx", "t", "tdg"}
    registers = [("a", 1), ("b", 1), ("c", 1)]
    for bits in ("000", "010", "100", "110", "111"):
        state = StateVector.from_bits(registers, bits)
        expected = simulate(program["tof"], state, program=program)
        actual = simulate_circuit(circuit, state)
        assert equiv_up_to_phase(expected.state, actual.state)
    flipped = simulate(program["tof"], StateVector.from_bits(registers, "110"), program=program)
    assert flipped.state.probabilities("c'")[1] == pytest.approx(1.0)


def test_maj_shares_branch_qubits() -> None:
    circuit = lower_entry(prepare(load_program("maj")), "maj")
    assert circuit.num_qubits == 5
    assert set(circuit.outputs) == {"a", "b", "c", "r"}


def test_fuel_is_passed_through() -> None:
    program = prepare(load_program("iterate"))
    with pytest.raises(FuelExhaustedError):
        lower_entry(program, "iterate", {"n": 5}, LowerConfig(fuel=1))


def test_qasm_round_trip_with_measurements() -> None:
    circuit = lower_entry(prepare(load_program("teleport")), "teleport")
    assert circuit.classical_bits == 2
    assert any(g.condition is not None for g in circuit.gates)
    assert parse_qasm(emit_qasm(circuit)) == circuit


def test_teleport_circuit_moves_the_state() -> None:
    circuit = lower_entry(prepare(load_program("teleport")), "teleport")
    state = StateVector({"x": (0,)}, [0.6, 0.8j])
    for seed in range(4):
        result = simulate_circuit(circuit, state, SimConfig(seed=seed))
        assert set(result.state.wires) == {"y"}
        assert equiv_up_to_phase(result.state, StateVector({"y": (0,)}, [0.6, 0.8j]))


@pytest.mark.parametrize("case", CORPUS, ids=str)
def test_circuit_matches_interpreter(case: CorpusCase) -> None:
    source, f = case.load()
    program = prepare(source)
    circuit = lower_entry(program, case.entry, case.args)
    rng = np.random.default_rng(0)
    state = StateVector.random(input_registers(f, case.args), rng)
    expected = simulate(program[case.entry], state, program=program, classical=case.args)
    actual = simulate_circuit(circuit, state if state.wires else None)
    assert equiv_up_to_phase(expected.state, actual.state)


def test_garbage_entry_outputs_match_interpreter() -> None:
    program = prepare(load_program("maj"))
    key = ModeKey("maj", (Mode.GARBAGE,))
    circuit = lower_entry(program, key)
    assert set(circuit.outputs) == {"a", "b", "c", "r", "bin.0"}
    state = StateVector.from_bits([("a", 1), ("b", 1), ("c", 1)], "110")
    expected = simulate(derive(program, key), state, program=program)
    actual = simulate_circuit(circuit, state)
    assert equiv_up_to_phase(expected.state, actual.state)


@pytest.mark.parametrize("case", CORPUS, ids=str)
def test_qasm_is_deterministic_and_reparses(case: CorpusCase) -> None:
    source, _ = case.load()
    circuit = lower_entry(prepare(source), case.entry, case.args)
    text = emit_qasm(circuit)
    assert parse_qasm(text) == circuit
    assert emit_qasm(parse_qasm(text)) == text
    again = lower_entry(prepare(case.load()[0]), case.entry, case.args)
    assert emit_qasm(again) == text
