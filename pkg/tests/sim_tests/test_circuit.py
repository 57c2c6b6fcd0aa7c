from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from unfab.lower import FlatCircuit
from unfab.lower import Gate
from unfab.sim import SimConfig
from unfab.sim import simulate_circuit


_S = 1 / np.sqrt(2)

# H 0; X 1; CX 0 1; Z 0 from |00>, then X 1; CX 1 0; X 1. Amplitudes are indexed by q0 q1.
_GATES = [
    Gate("h", (0,)),
    Gate("x", (1,)),
    Gate("cx", (0, 1)),
    Gate("u1", (0,), angle=Fraction(1)),
    Gate("x", (1,)),
    Gate("cx", (1, 0)),
    Gate("x", (1,)),
]
_TRACE = [
    [_S, 0, _S, 0],
    [0, _S, 0, _S],
    [0, _S, _S, 0],
    [0, _S, -_S, 0],
    [_S, 0, 0, -_S],
    [_S, -_S, 0, 0],
    [-_S, _S, 0, 0],
]


@pytest.mark.parametrize("steps", range(1, len(_GATES) + 1))
def test_two_qubit_trace(steps: int) -> None:
    circuit = FlatCircuit(2, _GATES[:steps], outputs={"q0": (0,), "q1": (1,)})
    state = simulate_circuit(circuit).state.reordered(["q0", "q1"])
    assert np.allclose(state.amplitudes, _TRACE[steps - 1], rtol=0, atol=1e-12)


def test_uncomputed_pair_leaves_first_qubit_clean() -> None:
    circuit = FlatCircuit(2, list(_GATES), outputs={"q0": (0,), "q1": (1,)})
    state = simulate_circuit(circuit).state
    assert state.probabilities("q0")[0] == pytest.approx(1.0, abs=1e-12)
    assert state.probabilities("q1") == pytest.approx([0.5, 0.5], abs=1e-12)


def test_hadamard_measurement_frequency() -> None:
    circuit = FlatCircuit(
        1,
        [Gate("h", (0,)), Gate("measure", (0,), cbit=0)],
        classical_bits=1,
        clbits={"m": (0,)},
    )
    samples = 10_000
    ones = sum(simulate_circuit(circuit, config=SimConfig(seed=s)).creg for s in range(samples))
    assert ones / samples == pytest.approx(0.5, abs=0.05)
