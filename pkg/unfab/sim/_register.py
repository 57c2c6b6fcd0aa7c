from __future__ import annotations

from collections.abc import Sequence
import math

import numpy as np

from unfab.exceptions import BudgetExceededError
from unfab.exceptions import UnnewViolationError
from unfab.sim._state import forget_oracle
from unfab.sim._state import SimConfig
from unfab.sim._state import StateVector


X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_Control = tuple[int, int]


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


class QubitRegister:
    """Mutable amplitude tensor over qubits identified by stable integer ids.

    Gates take the ids of their target qubits and a list of ``(id, value)`` controls; the gate
    only acts on the part of the state where every control qubit holds its value.
    """

    def __init__(self, config: SimConfig) -> None:
        self.config = config
        self._tensor = np.ones((), dtype=complex)
        self._ids: list[int] = []
        self._next = 0

    @classmethod
    def from_state(cls, state: StateVector, config: SimConfig) -> tuple[QubitRegister, dict]:
        """Load ``state``; return the register and the qubit ids of every named wire."""
        if state.num_qubits > config.max_qubits:
            raise BudgetExceededError(
                "Input has {} qubits, more than {}.".format(state.num_qubits, config.max_qubits)
            )
        register = cls(config)
        register._tensor = state.tensor().copy()
        register._ids = list(range(state.num_qubits))
        register._next = state.num_qubits
        return register, dict(state.wires)

    @property
    def num_qubits(self) -> int:
        return len(self._ids)

    def _axis(self, qubit: int) -> int:
        return self._ids.index(qubit)

    def allocate(self, count: int) -> tuple[int, ...]:
        if self.num_qubits + count > self.config.max_qubits:
            raise BudgetExceededError(
                "Allocating {} qubits exceeds the budget of {}.".format(
                    count, self.config.max_qubits
                )
            )
        ids = tuple(range(self._next, self._next + count))
        self._next += count
        zero = np.zeros((2,) * count, dtype=complex)
        zero[(0,) * count] = 1.0
        self._tensor = np.multiply.outer(self._tensor, zero)
        self._ids.extend(ids)
        return ids

    def _index(self, controls: Sequence[_Control]) -> tuple[object, ...] | None:
        # None when the controls contradict each other.
        index: list[object] = [slice(None)] * self.num_qubits
        for qubit, value in controls:
            axis = self._axis(qubit)
            if index[axis] != slice(None) and index[axis] != value:
                return None
            index[axis] = value
        return tuple(index)

    def apply(self, matrix: np.ndarray, target: int, controls: Sequence[_Control] = ()) -> None:
        """Apply a single-qubit ``matrix`` to ``target`` where the controls hold."""
        index = self._index(controls)
        if index is None:
            return
        fixed = {self._axis(q) for q, _ in controls}
        axis = self._axis(target)
        if axis in fixed:
            raise ValueError("Qubit {} cannot control itself.".format(target))
        sub_axis = axis - sum(1 for a in fixed if a < axis)
        sub = self._tensor[index]
        out = np.tensordot(matrix, sub, axes=([1], [sub_axis]))
        self._tensor[index] = np.moveaxis(out, 0, sub_axis)

    def apply_phase(self, angle: float, controls: Sequence[_Control] = ()) -> None:
        index = self._index(controls)
        if index is None:
            return
        self._tensor[index] *= np.exp(1j * angle)

    def mass(self, qubit: int, value: int, controls: Sequence[_Control] = ()) -> float:
        """Probability that ``qubit`` holds ``value`` and every control holds."""
        index = self._index(list(controls) + [(qubit, value)])
        if index is None:
            return 0.0
        return float(np.sum(np.abs(self._tensor[index]) ** 2))

    def assert_zero(self, qubits: Sequence[int], controls: Sequence[_Control] = ()) -> None:
        for qubit in qubits:
            if self.mass(qubit, 1, controls) > self.config.tolerance:
                raise UnnewViolationError(
                    "Deallocated qubit {} is not in state |0>.".format(qubit)
                )

    def release(self, qubits: Sequence[int]) -> None:
        """Remove qubits known to be |0> from the state."""
        self.assert_zero(qubits)
        for qubit in qubits:
            self._remove(qubit, 0)

    def _remove(self, qubit: int, value: int) -> None:
        axis = self._axis(qubit)
        self._tensor = np.take(self._tensor, value, axis=axis)
        del self._ids[axis]

    def measure(self, qubits: Sequence[int], rng: np.random.Generator) -> int:
        """Measure and remove ``qubits``; return their value, first qubit most significant."""
        value = 0
        for qubit in qubits:
            p1 = self.mass(qubit, 1)
            bit = 1 if rng.random() < p1 else 0
            axis = self._axis(qubit)
            kept = np.take(self._tensor, bit, axis=axis)
            norm = math.sqrt(max(p1 if bit else 1.0 - p1, 0.0))
            self._tensor = kept / norm if norm > 0 else kept
            del self._ids[axis]
            value = (value << 1) | bit
        return value

    def erase(self, qubits: Sequence[int]) -> bool:
        """Apply the forget semantics to ``qubits``; return whether erasure was possible."""
        names = {"x": tuple(self._axis(q) for q in qubits)}
        rest = [a for a in range(self.num_qubits) if a not in names["x"]]
        names.update({"r{}".format(a): (a,) for a in rest})
        state = StateVector(names, self._tensor.reshape(-1))
        erased = forget_oracle(state, "x", self.config.tolerance)
        if erased is None:
            return False
        order = ["r{}".format(a) for a in rest]
        self._tensor = erased.reordered(order).tensor().copy()
        self._ids = [self._ids[a] for a in rest]
        return True

    def to_state(self, wires: dict[str, Sequence[int]]) -> StateVector:
        """Return the state with named wires; every live qubit must belong to one wire."""
        names = list(wires)
        covered = [q for name in names for q in wires[name]]
        if sorted(covered) != sorted(self._ids):
            raise ValueError(
                "Wires {} do not cover the live qubits {}.".format(covered, self._ids)
            )
        axes = [self._axis(q) for q in covered]
        tensor = np.transpose(self._tensor, axes) if axes else self._tensor
        layout = {}
        index = 0
        for name in names:
            layout[name] = tuple(range(index, index + len(wires[name])))
            index += len(wires[name])
        return StateVector(layout, tensor.reshape(-1).copy())

    def project(self, qubit: int, value: int) -> None:
        """Remove ``qubit``, keeping the part of the state where it holds ``value``."""
        self._remove(qubit, value)

    def collapse(self, qubit: int, value: int) -> None:
        """Project ``qubit`` onto ``value`` and renormalise, keeping the qubit."""
        index: list[object] = [slice(None)] * self.num_qubits
        index[self._axis(qubit)] = 1 - value
        self._tensor[tuple(index)] = 0
        norm = float(np.linalg.norm(self._tensor))
        if norm > 0:
            self._tensor /= norm

    def load(self, qubits: Sequence[int], amplitudes: np.ndarray) -> None:
        """Replace the state by ``amplitudes`` over ``qubits`` and |0> on every other qubit."""
        rest = [q for q in self._ids if q not in qubits]
        tensor = np.asarray(amplitudes, dtype=complex).reshape((2,) * len(qubits))
        zero = np.zeros((2,) * len(rest), dtype=complex)
        zero[(0,) * len(rest)] = 1.0
        full = np.multiply.outer(tensor, zero)
        order = list(qubits) + rest
        self._tensor = np.transpose(full, [order.index(q) for q in self._ids]).copy()
