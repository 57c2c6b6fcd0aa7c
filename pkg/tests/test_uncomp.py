from __future__ import annotations

import numpy as np
import pytest

from unfab.exceptions import SynthesisError
from unfab.ir import alpha_equivalent
from unfab.ir import qvar
from unfab.sim import equiv_up_to_phase
from unfab.sim import input_registers
from unfab.sim import simulate
from unfab.sim import StateVector
from unfab.testing import load_program
from unfab.textfmt import parse_function
from unfab.uncomp import cancel_dup_pairs
from unfab.uncomp import ensure_uncomputed
from unfab.uncomp import forget_count
from unfab.uncomp import inverse_pairs
from unfab.uncomp import synthesize_uncomputation
from unfab.uncomp import SynthState
from unfab.uncomp import undo_statement
from unfab.verifier import verify_function


MAJ_U = """
maj[a, b, c] :=p {
  t :=p dup[a]
  t'' :=p dup[t]
  x :=p CX[b](t'')
  r0 :=p dup[b] if !x
  r1 :=p dup[c] if x
  r :=p select[x](r0, r1)
  t' :=p CX^adj[b](x)
  :=p undup[t](t')
  :=p undup[a](t)
} > r
"""

MAJ_U_SIMPLIFIED = """
maj[a, b, c] :=p {
  t'' :=p dup[a]
  x :=p CX[b](t'')
  r0 :=p dup[b] if !x
  r1 :=p dup[c] if x
  r :=p select[x](r0, r1)
  t' :=p CX^adj[b](x)
  :=p undup[a](t')
} > r
"""


def test_synthesize_uncomputation_of_maj() -> None:
    f = load_program("maj")["maj"]
    result = synthesize_uncomputation(f)
    assert forget_count(result) == 0
    assert alpha_equivalent(result, parse_function(MAJ_U))
    assert verify_function(result) == []


def test_inverse_pairs_link_compute_and_uncompute() -> None:
    result = synthesize_uncomputation(load_program("maj")["maj"])
    pairs = [(str(result.body[c].op), str(result.body[u].op)) for c, u in inverse_pairs(result)]
    assert sorted(pairs) == [("CX", "CX^adj"), ("dup", "undup")]
    for c, u in inverse_pairs(result):
        assert c < u


def test_cancel_dup_pairs_of_maj() -> None:
    result = cancel_dup_pairs(synthesize_uncomputation(load_program("maj")["maj"]))
    assert alpha_equivalent(result, parse_function(MAJ_U_SIMPLIFIED))
    assert verify_function(result) == []


def test_cancel_dup_pairs_turns_copies_of_fresh_qubits_into_allocations() -> None:
    f = parse_function(
        """
        f() :=p {
          a :=p new0
          b :=p dup[a]
          :=p undup[b](a)
        } > b
        """
    )
    result = cancel_dup_pairs(f)
    assert [str(s.op) for s in result.body] == ["new0", "new0", "unnew0"]


def test_synthesis_without_forgets_is_identity() -> None:
    f = load_program("epr")["copy"]
    assert synthesize_uncomputation(f) == f


def test_synthesis_recurses_into_dependencies() -> None:
    f = parse_function(
        """
        f[a, b](y) :=p {
          t :=p dup[a]
          u :=p CX[b](t)
          v :=p X(u)
          y' :=p CX[v](y)
          :=p forget(v)
        } > y'
        """
    )
    result = synthesize_uncomputation(f)
    assert forget_count(result) == 0
    assert len(list(inverse_pairs(result))) == 3
    assert verify_function(result) == []


def test_conditional_forget_is_uncomputed_under_its_clause() -> None:
    f = parse_function(
        """
        f[c, a](y) :=p {
          t :=p dup[a] if c
          y0, y1 :=p distribute[c](y)
          y1' :=p CX[t](y1) if c
          y' :=p select[c](y0, y1')
          :=p forget(t) if c
        } > y'
        """
    )
    result = synthesize_uncomputation(f)
    (undup,) = [s for s in result.body if str(s.op) == "undup"]
    assert [str(lit) for lit in undup.condition] == ["c"]
    assert verify_function(result) == []


def test_ensure_uncomputed_rejects_parameters_and_quantum_producers() -> None:
    program = load_program("hard")
    state = SynthState.start(program["HARD"])
    with pytest.raises(SynthesisError):
        ensure_uncomputed(state, 1, qvar("x"))
    bad = load_program("bad")["BAD"]
    with pytest.raises(SynthesisError):
        synthesize_uncomputation(bad)


def test_undo_statement_inserts_tagged_inverse() -> None:
    f = parse_function("f[a](y) :=p { t :=p dup[a]; y' :=p CX[t](y); :=p forget(t) } > y'")
    state = undo_statement(SynthState.start(f), 2, 0)
    assert [str(s.op) for s in state.body] == ["dup", "CX", "forget", "undup"]
    assert state.body[0].pair_tag == state.body[3].pair_tag
    assert state.pair_tags == [(0, 3)]
    assert state.extended == {qvar("t").ident}


def test_forgets_sharing_a_producer_undo_it_once() -> None:
    f = parse_function(
        """
        f[a:2](y) :=p {
          t:2 :=p dup[a]
          u, v :=p uncat2[1, 1](t)
          y' :=p CX[u](y)
          y'' :=p CX[v](y')
          :=p forget(u)
          :=p forget(v)
        } > y''
        """
    )
    result = synthesize_uncomputation(f)
    assert forget_count(result) == 0
    assert [s.op.target for s in result.body].count("cat") == 1
    assert len(list(inverse_pairs(result))) == 2
    assert verify_function(result) == []


INDEPENDENT_FORGETS = """
f[a, b](y) :=p {{
  t :=p dup[a]
  u :=p dup[b]
  y' :=p CX[t](y)
  y'' :=p CX[u](y')
  {}
  {}
}} > y''
"""


def test_order_of_independent_forgets_does_not_matter() -> None:
    first = synthesize_uncomputation(
        parse_function(INDEPENDENT_FORGETS.format(":=p forget(t)", ":=p forget(u)"))
    )
    second = synthesize_uncomputation(
        parse_function(INDEPENDENT_FORGETS.format(":=p forget(u)", ":=p forget(t)"))
    )
    assert sorted(str(s.op) for s in first.body) == sorted(str(s.op) for s in second.body)
    assert verify_function(first) == [] and verify_function(second) == []
    rng = np.random.default_rng(0)
    registers = input_registers(first)
    for _ in range(8):
        state = StateVector.random(registers, rng)
        assert equiv_up_to_phase(simulate(first, state).state, simulate(second, state).state)
    assert alpha_equivalent(synthesize_uncomputation(first), first)
