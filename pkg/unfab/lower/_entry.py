from __future__ import annotations

from collections.abc import Mapping
import dataclasses

from optuna.logging import get_logger

from unfab.census import CallCensus
from unfab.ir import ModeKey
from unfab.ir import Program
from unfab.lower._allocate import allocate_registers
from unfab.lower._circuit import FlatCircuit
from unfab.lower._decompose import decompose_controls
from unfab.lower._unroll import _unroll_entry
from unfab.lower._unroll import DEFAULT_FUEL
from unfab.pipeline import derive


_logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True)
class LowerConfig:
    fuel: int = DEFAULT_FUEL


def lower_entry(
    program: Program,
    entry: str | ModeKey,
    classical_args: Mapping[str, int] | None = None,
    config: LowerConfig | None = None,
    *,
    census: CallCensus | None = None,
) -> FlatCircuit:
    """Lower ``entry`` to a circuit: inline, decompose controls and allocate qubits.

    The outputs of the circuit are named the way :func:`~unfab.sim.simulate` names the
    results of ``entry``: conserved parameters, returned variables and ``<var>.<k>`` for the
    qubits of returned garbage. Measured results are also reachable by the names the entry
    returns them under.

    Args:
        program:
            A program prepared by :func:`~unfab.pipeline.prepare`.
        entry:
            Name or mode key of the entry function.
        classical_args:
            Values of the classical parameters of the entry.
        config:
            Lowering limits.
        census:
            Receives one record per inlined call.

    Returns:
        The circuit.

    """
    config = config or LowerConfig()
    key = entry if isinstance(entry, ModeKey) else ModeKey(entry)
    flat, names = _unroll_entry(
        program,
        key,
        dict(classical_args or {}),
        config.fuel,
        census if census is not None else CallCensus(),
    )
    circuit = allocate_registers(decompose_controls(flat))
    labels = [v.name for v in flat.conserved_params] + names
    circuit.outputs = dict(zip(labels, circuit.outputs.values()))
    f = derive(program, key)
    for ours, theirs in zip(flat.returned_classical, f.returned_classical):
        if ours.name in circuit.clbits:
            circuit.clbits.setdefault(theirs.name, circuit.clbits[ours.name])
    _logger.debug(
        "Lowered {}: {} qubits, {} gates.".format(key, circuit.num_qubits, len(circuit.gates))
    )
    return circuit
