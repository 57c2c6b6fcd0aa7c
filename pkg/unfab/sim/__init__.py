from unfab.sim._circuit import CircuitResult
from unfab.sim._circuit import simulate_circuit
from unfab.sim._conserved import check_conserved
from unfab.sim._interpreter import input_registers
from unfab.sim._interpreter import simulate
from unfab.sim._interpreter import SimulationResult
from unfab.sim._register import QubitRegister
from unfab.sim._state import equiv_up_to_phase
from unfab.sim._state import forget_oracle
from unfab.sim._state import SimConfig
from unfab.sim._state import StateVector


__all__ = [
    "CircuitResult",
    "QubitRegister",
    "SimConfig",
    "SimulationResult",
    "StateVector",
    "check_conserved",
    "equiv_up_to_phase",
    "forget_oracle",
    "input_registers",
    "simulate",
    "simulate_circuit",
]
