from __future__ import annotations

from collections.abc import Mapping
from collections.abc import Sequence

import numpy as np
from optuna._experimental import experimental_func

from unfab.ir import FunctionDef
from unfab.ir import Program
from unfab.sim._interpreter import input_registers
from unfab.sim._interpreter import simulate
from unfab.sim._state import SimConfig
from unfab.sim._state import StateVector


def _branch_norms(state: StateVector, names: Sequence[str]) -> np.ndarray:
    # Norm of the component of ``state`` for each joint value of the ``names`` registers.
    qubits = [q for name in names for q in state.wires[name]]
    tensor = np.moveaxis(state.tensor(), qubits, range(len(qubits)))
    weights = (np.abs(tensor) ** 2).reshape(1 << len(qubits), -1).sum(axis=1)
    return np.sqrt(weights)


@experimental_func("0.1.0")
def check_conserved(
    f: FunctionDef,
    conserved: Sequence[str] | None = None,
    trials: int = 100,
    config: SimConfig | None = None,
    *,
    program: Program | None = None,
    classical: Mapping[str, int] | None = None,
    renames: Mapping[str, str] | None = None,
) -> bool:
    """Check that ``f`` preserves, for every value of its conserved registers, the norm of the
    corresponding component of random input states.

    Args:
        f:
            A measure-free function.
        conserved:
            Input registers to check; defaults to the conserved parameters of ``f``.
        trials:
            Number of random input states.
        config:
            Seed, budget and tolerance.
        program:
            Program resolving calls of ``f``.
        classical:
            Values of the classical parameters.
        renames:
            Output register holding each checked input register, when ``f`` consumes it and
            returns it under another name.

    Returns:
        Whether every trial preserved every component norm within the tolerance.

    """
    config = config or SimConfig()
    names = list(conserved) if conserved is not None else [v.name for v in f.conserved_params]
    outputs = [(renames or {}).get(name, name) for name in names]
    rng = np.random.default_rng(config.seed)
    registers = input_registers(f, classical)
    for _ in range(trials):
        state = StateVector.random(registers, rng)
        before = _branch_norms(state, names)
        result = simulate(f, state, config, program=program, classical=classical)
        after = _branch_norms(result.state, outputs)
        if not np.allclose(before, after, atol=max(config.tolerance, 1e-12) * 1e3):
            return False
    return True
