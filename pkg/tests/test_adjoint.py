from __future__ import annotations

import numpy as np
import pytest

from unfab.adjoint import make_adjoint
from unfab.adjoint import make_classical
from unfab.adjoint import synthesize_adjoint
from unfab.adjoint import synthesize_classical
from unfab.exceptions import SynthesisError
from unfab.ir import alpha_equivalent
from unfab.ir import cvar
from unfab.ir import Effect
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import qvar
from unfab.pipeline import derive
from unfab.pipeline import prepare
from unfab.sim import equiv_up_to_phase
from unfab.sim import input_registers
from unfab.sim import simulate
from unfab.sim import StateVector
from unfab.testing import CORPUS
from unfab.testing import CorpusCase
from unfab.testing import load_program
from unfab.textfmt import parse_function
from unfab.textfmt import parse_program
from unfab.verifier import verify_function


def test_adjoint_of_epr() -> None:
    program = load_program("epr")
    adj = synthesize_adjoint(program["EPR"], program)
    assert adj.modes == (Mode.ADJOINT,)
    assert [str(s.op) for s in adj.body] == ["CX^adj", "H^adj"]
    assert adj.consumed_params == (qvar("a'"), qvar("b'"))
    assert adj.returned_quantum == (qvar("a"), qvar("b"))
    assert verify_function(adj, program) == []


def test_adjoint_recomputes_classical_values_first() -> None:
    f = load_program("extract")["extract"]
    adj = synthesize_adjoint(f)
    assert [s.op.target for s in adj.body] == ["calc", "uncat", "cat"]
    assert adj.body[1].op.static_args == f.body[2].op.static_args
    # Intermediates that are neither parameters nor results are renamed.
    assert {v.name for v in adj.body[1].produced_quantum} == {"x~", "z~"}
    assert [v.name for v in adj.body[2].consumed] == ["x~", "y", "z~"]
    assert [v.name for v in adj.returned_quantum] == ["a"]


def test_adjoint_swaps_named_inverses() -> None:
    program = load_program("controlled")
    adj = synthesize_adjoint(program["cx_via_distribute"], program)
    assert [str(s.op) for s in adj.body] == ["distribute", "X^adj", "select"]
    assert [str(lit) for lit in adj.body[1].condition] == ["a"]
    assert verify_function(adj, program) == []


def test_adjoint_of_adjoint_toggles_back() -> None:
    program = load_program("epr")
    twice = synthesize_adjoint(synthesize_adjoint(program["EPR"], program), program)
    assert [s.op.target for s in twice.body] == ["H", "CX"]
    assert twice.returned_quantum == program["EPR"].returned_quantum


@pytest.mark.parametrize("use_program", [True, False])
def test_measuring_functions_have_no_adjoint(use_program: bool) -> None:
    program = load_program("teleport")
    with pytest.raises(SynthesisError, match="measuring"):
        synthesize_adjoint(program["teleport"], program if use_program else None)
    with pytest.raises(SynthesisError):
        synthesize_classical(program["send"], program if use_program else None)


def test_make_adjoint_moves_garbage_to_the_consumed_side() -> None:
    f = parse_function("f[a] :=p { b, %g :=p dup^G[a] } > b, %g")
    adj = make_adjoint(f.body[0])
    assert adj.op.consumes_garbage
    assert [v.name for v in adj.consumed] == ["b", "g"]
    assert adj.produced_quantum == ()


def test_classical_projection() -> None:
    program = parse_program(
        """
        g[$k](a) :=p {
          $j :=p $k + 1
          b :=p X(a)
        } > b, $j

        f[$k](a) :=p {
          b, $m :=p g[$k](a)
          c :=p X(b)
        } > c, $m
        """
    )
    projection = synthesize_classical(program["f"], program)
    assert projection.modes == (Mode.CLASSICAL,)
    assert projection.declared_effect is Effect.PURE
    (stmt,) = projection.body
    assert str(stmt.op) == "g^O"
    assert stmt.conserved == (cvar("k"),)
    assert stmt.consumed == ()
    assert stmt.produced_classical == (cvar("m"),)
    assert projection.returned_quantum == ()
    assert projection.returned_classical == (cvar("m"),)


def test_make_classical_drops_quantum_literals() -> None:
    f = parse_function("f[$k, c](a) :=p { b, $m :=p f[$k, c](a) if c && $k } > b, $m")
    stmt = make_classical(f.body[0])
    assert [v.name for v in stmt.conserved] == ["k"]
    assert [str(lit) for lit in stmt.condition] == ["$k"]


def test_functions_that_still_forget_have_no_adjoint() -> None:
    program = load_program("iterate")
    with pytest.raises(SynthesisError, match="forgets"):
        synthesize_adjoint(program["step"], program)


def test_adjoint_undoes_epr_on_random_states() -> None:
    program = load_program("epr")
    f = program["EPR"]
    adj = synthesize_adjoint(f, program)
    rng = np.random.default_rng(16)
    for _ in range(16):
        state = StateVector.random([("a", 1), ("b", 1)], rng)
        forward = simulate(f, state, program=program)
        back = simulate(adj, forward.state, program=program)
        assert np.allclose(back.state.reordered(["a", "b"]).amplitudes, state.amplitudes)


@pytest.mark.parametrize("case", CORPUS, ids=str)
def test_adjoint_is_an_involution(case: CorpusCase) -> None:
    source, _ = case.load()
    program = prepare(source)
    f = program[case.entry]
    twice = synthesize_adjoint(synthesize_adjoint(f, program), program)
    assert alpha_equivalent(twice, f)
    assert twice.consumed_params == f.consumed_params
    assert twice.returned_quantum == f.returned_quantum


@pytest.mark.parametrize("case", CORPUS, ids=str)
def test_adjoint_undoes_the_function(case: CorpusCase) -> None:
    source, f = case.load()
    program = prepare(source)
    adj = derive(program, ModeKey(case.entry, (Mode.ADJOINT,)))
    rng = np.random.default_rng(3)
    registers = input_registers(f, case.args)
    for _ in range(8):
        state = StateVector.random(registers, rng)
        forward = simulate(program[case.entry], state, program=program, classical=case.args)
        back = simulate(adj, forward.state, program=program, classical=case.args)
        assert equiv_up_to_phase(back.state, state)
