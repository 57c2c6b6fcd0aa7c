from unfab.lower._allocate import allocate_registers
from unfab.lower._allocate import AllocatorState
from unfab.lower._circuit import FlatCircuit
from unfab.lower._circuit import Gate
from unfab.lower._circuit import gate_count
from unfab.lower._circuit import GateCount
from unfab.lower._decompose import alias_groups
from unfab.lower._decompose import decompose_controls
from unfab.lower._entry import lower_entry
from unfab.lower._entry import LowerConfig
from unfab.lower._qasm import emit_qasm
from unfab.lower._qasm import parse_qasm
from unfab.lower._unroll import DEFAULT_FUEL
from unfab.lower._unroll import inline_unroll


__all__ = [
    "AllocatorState",
    "DEFAULT_FUEL",
    "FlatCircuit",
    "Gate",
    "GateCount",
    "LowerConfig",
    "alias_groups",
    "allocate_registers",
    "decompose_controls",
    "emit_qasm",
    "gate_count",
    "inline_unroll",
    "lower_entry",
    "parse_qasm",
]
