from __future__ import annotations

import itertools

import numpy as np
import pytest

from unfab.exceptions import SynthesisError
from unfab.garbage import bin_width
from unfab.garbage import connect_garbage
from unfab.garbage import connect_pairs
from unfab.garbage import erase_uncomputation
from unfab.garbage import propagate_garbage
from unfab.ir import alpha_equivalent
from unfab.ir import Const
from unfab.ir import Effect
from unfab.ir import effect_of
from unfab.ir import FunctionDef
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import Program
from unfab.lower import lower_entry
from unfab.opt import simplify
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
from unfab.uncomp import synthesize_uncomputation
from unfab.verifier import verify_function


MAJ_UG = """
majG[a, b, c] :=p {
  t'', %g1 :=p dup^G[a]
  :=p dispose(%g1)
  t' :=p dup[t'']
  x, %g0 :=p CX^G[b](t'')
  :=p dispose(%g0)
  r0, %g2 :=p dup^G[b] if !x
  :=p dispose(%g2) if !x
  r1, %g3 :=p dup^G[c] if x
  :=p dispose(%g3) if x
  r, %g4 :=p select^G[x](r0, r1)
  :=p dispose(%g4)
  :=p dispose(x)
  %g5 :=p undup^G[a](t')
  :=p dispose(%g5)
} > r, %bin
"""

MAJ_UG_SIMPLIFIED = """
majG[a, b, c] :=p {
  t'', %g1 :=p dup^G[a]
  :=p dispose(%g1)
  x, %g0 :=p CX^G[b](t'')
  :=p dispose(%g0)
  r0, %g2 :=p dup^G[b] if !x
  :=p dispose(%g2) if !x
  r1, %g3 :=p dup^G[c] if x
  :=p dispose(%g3) if x
  r, %g4 :=p select^G[x](r0, r1)
  :=p dispose(%g4)
  :=p dispose(x)
} > r, %bin
"""


def _maj_u() -> tuple[Program, FunctionDef]:
    program = prepare(load_program("maj"))
    return program, program["maj"]


def test_prepared_maj_connects_its_remaining_pair() -> None:
    _, f = _maj_u()
    assert [str(s.op) for s in f.body] == [
        "dup",
        "CX^G",
        "dup",
        "dup",
        "select",
        "CX^G^adj",
        "undup",
    ]
    garbage = [v for s in f.body for v in s.produced_quantum if v.is_garbage]
    assert len(garbage) == 1
    assert garbage[0] in f.body[5].consumed


def test_erase_uncomputation_of_maj() -> None:
    program, f = _maj_u()
    g = erase_uncomputation(f, program)
    assert g.modes == (Mode.GARBAGE,)
    assert g.bin is not None and g.returned_quantum[-1] == g.bin
    assert alpha_equivalent(g, parse_function(MAJ_UG))
    assert all(not s.op.consumes_garbage for s in g.body)
    assert verify_function(g, program) == []


def test_simplified_garbage_variant_of_maj() -> None:
    program, f = _maj_u()
    g = simplify(erase_uncomputation(f, program))
    assert len(g.body) == 11
    assert "undup^G" not in [str(s.op) for s in g.body]
    assert alpha_equivalent(g, parse_function(MAJ_UG_SIMPLIFIED))
    assert verify_function(g, program) == []


def test_erase_rejects_functions_that_still_forget() -> None:
    program = load_program("maj")
    with pytest.raises(SynthesisError, match="forgets"):
        erase_uncomputation(program["maj"], program)


def test_maj_bin_holds_one_qubit() -> None:
    program, f = _maj_u()
    g = erase_uncomputation(f, program)
    assert g.bin_width == Const(1)
    circuit = lower_entry(program, ModeKey("maj", (Mode.GARBAGE,)))
    assert [name for name in circuit.outputs if name.startswith("bin.")] == ["bin.0"]


def test_bin_width_follows_classical_parameters() -> None:
    f = parse_function(
        """
        h[$k](a:$k + 1, b) :=p {
          $z :=p $k == 0
          :=p dispose(a)
          :=p dispose(b) if !$z
        } > %bin
        """
    )
    width = bin_width(f)
    assert width is not None
    assert width.evaluate({"k": 0}) == 1
    assert width.evaluate({"k": 3}) == 5


MAJ_COPY = """
maj[a, b, c] :=p {
  t :=p dup[a]
  x :=p CX[b](t)
  r0 :=p dup[b] if !x
  r1 :=p dup[c] if x
  r :=p select[x](r0, r1)
  :=p forget(x)
} > r

w[a, b, c] :=p {
  r :=p maj[a, b, c]
  s :=p dup[r]
  :=p forget(r)
} > s
"""


def test_bin_width_includes_the_bins_of_callees() -> None:
    program = prepare(parse_program(MAJ_COPY))
    derive(program, ModeKey("maj", (Mode.GARBAGE,)))
    w = derive(program, ModeKey("w", (Mode.GARBAGE,)))
    assert isinstance(w.bin_width, Const)
    circuit = lower_entry(program, ModeKey("w", (Mode.GARBAGE,)))
    bins = [name for name in circuit.outputs if name.startswith("bin.")]
    assert len(bins) == w.bin_width.value


def test_recursive_bin_width_is_unknown() -> None:
    program = prepare(load_program("iterate"))
    assert derive(program, ModeKey("iterate", (Mode.GARBAGE,))).bin_width is None


@pytest.mark.parametrize("case", CORPUS, ids=str)
def test_garbage_variant_round_trip(case: CorpusCase) -> None:
    source, _ = case.load()
    program = prepare(source)
    f = program[case.entry]
    if effect_of(f, program) >= Effect.QUANTUM:
        pytest.skip("only pure functions have a garbage variant")
    g = derive(program, ModeKey(case.entry, (Mode.GARBAGE,)))
    g_adj = derive(program, ModeKey(case.entry, (Mode.GARBAGE, Mode.ADJOINT)))
    registers = input_registers(f, case.args)
    rng = np.random.default_rng(5)
    for _ in range(8):
        state = StateVector.random(registers, rng)
        forward = simulate(g, state, program=program, classical=case.args)
        back = simulate(
            g_adj, forward.state, program=program, classical=case.args, garbage=forward.garbage
        )
        assert equiv_up_to_phase(back.state, state)

    outputs = [v.name for v in f.conserved_params + f.returned_quantum]
    width = sum(w for _, w in registers)
    for bits in itertools.product("01", repeat=width):
        basis = StateVector.from_bits(registers, "".join(bits))
        expected = simulate(f, basis, program=program, classical=case.args).state
        actual = simulate(g, basis, program=program, classical=case.args).state
        for name in outputs:
            assert np.allclose(expected.probabilities(name), actual.probabilities(name))


def test_derive_caches_garbage_variant() -> None:
    program, _ = _maj_u()
    key = ModeKey("maj", (Mode.GARBAGE,))
    g = derive(program, key)
    assert derive(program, key) is g
    assert program.lookup(key) is g


def test_erase_rejects_quantum_functions() -> None:
    program = prepare(load_program("epr"))
    with pytest.raises(SynthesisError):
        erase_uncomputation(program["EPR"], program)


def test_connect_garbage() -> None:
    f = synthesize_uncomputation(load_program("maj")["maj"])
    c, u = 2, 6
    g = connect_garbage(f, c, u)
    assert str(g.body[c].op) == "CX^G"
    assert str(g.body[u].op) == "CX^G^adj"
    (garbage,) = [v for v in g.body[c].produced_quantum if v.is_garbage]
    assert g.body[u].consumed[-1] == garbage
    with pytest.raises(SynthesisError):
        connect_garbage(g, c, u)
    with pytest.raises(SynthesisError):
        connect_garbage(f, 0, 6)


def test_connect_pairs_connects_every_tagged_pair() -> None:
    f = connect_pairs(synthesize_uncomputation(load_program("maj")["maj"]))
    assert sum(1 for s in f.body if s.op.produces_garbage) == 2
    assert sum(1 for s in f.body if s.op.consumes_garbage) == 2
    assert verify_function(f) == []


def test_propagate_garbage() -> None:
    f = parse_function("f[a] :=p { b :=p dup[a]; c :=p X(b) } > c")
    g = propagate_garbage(f, 1)
    assert [str(s.op) for s in g.body] == ["dup", "X^G", "dispose"]
    assert g.body[2].consumed == (g.body[1].produced_quantum[-1],)
    # Statements producing garbage already are left alone.
    assert propagate_garbage(g, 1) == g
