from __future__ import annotations

from collections.abc import Mapping
from collections.abc import Sequence
import dataclasses
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """Simulation limits.

    Args:
        max_qubits:
            Largest number of simultaneously live qubits; exceeding it raises
            :exc:`~unfab.exceptions.BudgetExceededError` before any allocation.
        seed:
            Seed of the measurement sampler.
        tolerance:
            Amplitude tolerance of zero checks and state comparisons.

    """

    max_qubits: int = 20
    seed: int | None = None
    tolerance: float = 1e-9


class StateVector:
    """Amplitudes over named registers.

    ``wires`` maps register names to their qubit positions. Position 0 is the most significant
    bit of a basis label, and a register's own qubits are listed most significant first.
    """

    def __init__(
        self, wires: Mapping[str, Sequence[int]], amplitudes: np.ndarray | Sequence[complex]
    ) -> None:
        self.wires = {name: tuple(qubits) for name, qubits in wires.items()}
        self.amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        used = sorted(q for qubits in self.wires.values() for q in qubits)
        if used != list(range(len(used))):
            raise ValueError("Wires must cover qubits 0..n-1 exactly once.")
        if self.amplitudes.size != 1 << len(used):
            raise ValueError(
                "Expected {} amplitudes for {} qubits, got {}.".format(
                    1 << len(used), len(used), self.amplitudes.size
                )
            )

    @classmethod
    def from_registers(
        cls, registers: Sequence[tuple[str, int]], values: Mapping[str, int] | None = None
    ) -> StateVector:
        """Return the basis state holding ``values`` (default 0) in consecutive registers."""
        values = values or {}
        wires: dict[str, tuple[int, ...]] = {}
        index = 0
        for name, width in registers:
            wires[name] = tuple(range(index, index + width))
            index += width
        label = 0
        for name, width in registers:
            label = (label << width) | (values.get(name, 0) & ((1 << width) - 1))
        amplitudes = np.zeros(1 << index, dtype=complex)
        amplitudes[label] = 1.0
        return cls(wires, amplitudes)

    @classmethod
    def from_bits(cls, registers: Sequence[tuple[str, int]], bits: str) -> StateVector:
        """Return the basis state whose label, register by register, is the string ``bits``."""
        total = sum(width for _, width in registers)
        if len(bits) != total or set(bits) - {"0", "1"}:
            raise ValueError("Expected a bit string of length {}, got '{}'.".format(total, bits))
        values = {}
        start = 0
        for name, width in registers:
            values[name] = int(bits[start : start + width] or "0", 2)
            start += width
        return cls.from_registers(registers, values)

    @classmethod
    def random(
        cls, registers: Sequence[tuple[str, int]], rng: np.random.Generator
    ) -> StateVector:
        """Return a Haar-like random state: normalised complex Gaussian amplitudes."""
        state = cls.from_registers(registers)
        size = state.amplitudes.size
        amplitudes = rng.normal(size=size) + 1j * rng.normal(size=size)
        return cls(state.wires, amplitudes / np.linalg.norm(amplitudes))

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.size)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def register_order(self) -> list[str]:
        return sorted(self.wires, key=lambda name: min(self.wires[name], default=-1))

    def reordered(self, names: Sequence[str]) -> StateVector:
        """Return the same state with registers laid out in the order of ``names``."""
        if sorted(names) != sorted(self.wires):
            raise ValueError(
                "Register sets differ: {} vs {}.".format(sorted(names), sorted(self.wires))
            )
        axes = [q for name in names for q in self.wires[name]]
        tensor = np.transpose(self.tensor(), axes) if axes else self.tensor()
        wires = {}
        index = 0
        for name in names:
            width = len(self.wires[name])
            wires[name] = tuple(range(index, index + width))
            index += width
        return StateVector(wires, tensor.reshape(-1))

    def probabilities(self, name: str) -> np.ndarray:
        """Marginal distribution of the value of register ``name``."""
        qubits = self.wires[name]
        tensor = np.moveaxis(np.abs(self.tensor()) ** 2, qubits, range(len(qubits)))
        return tensor.reshape(1 << len(qubits), -1).sum(axis=1)

    def nonzero(self, tolerance: float = 1e-9) -> list[tuple[str, complex]]:
        """Return ``(label, amplitude)`` pairs with registers printed in position order."""
        names = self.register_order()
        state = self.reordered(names)
        n = state.num_qubits
        found = []
        for index, amplitude in enumerate(state.amplitudes):
            if abs(amplitude) > tolerance:
                found.append((format(index, "0{}b".format(n)) if n else "", complex(amplitude)))
        return found

    def format(self, tolerance: float = 1e-9) -> str:
        lines = []
        for label, amplitude in self.nonzero(tolerance):
            lines.append(
                "{}: {:.6f}{:+.6f}i".format(label or "-", amplitude.real, amplitude.imag)
            )
        return "\n".join(lines)

    def __repr__(self) -> str:
        return "StateVector(wires={}, num_qubits={})".format(self.wires, self.num_qubits)


def equiv_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-9) -> bool:
    """Whether ``a`` and ``b`` are equal up to a global phase: ``|<a|b>| >= 1 - tol``.

    Raises:
        :exc:`ValueError`:
            If the states are over different registers.

    """
    if {n: len(q) for n, q in a.wires.items()} != {n: len(q) for n, q in b.wires.items()}:
        raise ValueError("Cannot compare states over different registers.")
    names = a.register_order()
    left = a.reordered(names).amplitudes
    right = b.reordered(names).amplitudes
    return bool(abs(np.vdot(left, right)) >= 1 - tol)


def forget_oracle(
    state: StateVector, name: str, tolerance: float = 1e-9
) -> StateVector | None:
    """Erase register ``name`` from the labels of the basis vectors of ``state``.

    The erasure is only defined when, for every assignment of the remaining registers, at most
    one value of ``name`` has a non-zero amplitude; the resulting state then keeps the norm.

    Returns:
        The state without ``name``, or :obj:`None` when erasing would merge distinct basis
        vectors with non-zero amplitudes.

    """
    qubits = state.wires[name]
    rest = [n for n in state.register_order() if n != name]
    k = len(qubits)
    tensor = np.moveaxis(state.tensor(), qubits, range(state.num_qubits - k, state.num_qubits))
    matrix = tensor.reshape(-1, 1 << k)
    support = np.abs(matrix) > tolerance
    if np.any(support.sum(axis=1) > 1):
        return None
    erased = matrix.sum(axis=1)
    remaining = [q for q in range(state.num_qubits) if q not in qubits]
    position = {q: i for i, q in enumerate(remaining)}
    wires = {n: tuple(position[q] for q in state.wires[n]) for n in rest}
    return StateVector(wires, erased)
