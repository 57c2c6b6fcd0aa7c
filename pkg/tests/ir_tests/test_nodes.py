from __future__ import annotations

import dataclasses

import pytest

from unfab.ir import canonical_modes
from unfab.ir import cvar
from unfab.ir import Effect
from unfab.ir import fresh_name
from unfab.ir import Literal
from unfab.ir import make_condition
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import Operation
from unfab.ir import Program
from unfab.ir import qvar
from unfab.ir import Statement
from unfab.ir import Substitution
from unfab.textfmt import parse_function


ADJ = Mode.ADJOINT
G = Mode.GARBAGE
O = Mode.CLASSICAL  # noqa: E741


@pytest.mark.parametrize(
    "modes, expected",
    [
        ((), ()),
        ((ADJ, ADJ), ()),
        ((ADJ, ADJ, ADJ), (ADJ,)),
        ((G, ADJ), (G, ADJ)),
        ((ADJ, G), (ADJ, G)),
        ((G, O), (O,)),
        ((ADJ, O), (O,)),
        ((O, ADJ), (O,)),
        ((G, ADJ, ADJ), (G,)),
    ],
)
def test_canonical_modes(modes: tuple[Mode, ...], expected: tuple[Mode, ...]) -> None:
    assert canonical_modes(modes) == expected


def test_canonical_modes_rejects_garbage_of_classical_projection() -> None:
    with pytest.raises(ValueError):
        canonical_modes((O, G))


def test_mode_key() -> None:
    key = ModeKey("f", (G, ADJ))
    assert str(key) == "f^G^adj"
    assert key.adjoint
    assert key.garbage
    assert key.parent == ModeKey("f", (G,))
    assert ModeKey("f", (ADJ, ADJ)) == ModeKey("f")
    assert ModeKey("f", (G, O)).classical_only


def test_operation_inverse_swaps_named_builtins() -> None:
    assert Operation("select").inverse() == Operation("distribute")
    assert Operation("distribute").inverse() == Operation("select")
    assert Operation("cat", (), (2,)).inverse().target == "uncat"


def test_operation_inverse_appends_adjoint() -> None:
    assert Operation("CX").inverse() == Operation("CX", (ADJ,))
    assert Operation("CX", (ADJ,)).inverse() == Operation("CX")
    # With other modes applied, a named inverse is not used.
    assert Operation("select", (G,)).inverse() == Operation("select", (G, ADJ))
    assert Operation("f", (G,)).inverse().consumes_garbage


def test_operation_garbage_flags() -> None:
    op = Operation("f", (G,))
    assert op.produces_garbage
    assert not op.consumes_garbage
    assert op.with_mode(ADJ).consumes_garbage
    assert Operation("f", (ADJ, G)).produces_garbage
    assert Operation("f", (G, ADJ, ADJ)).produces_garbage
    assert Operation("f", (ADJ, G, ADJ)).flip_count() == 2


def test_make_condition_is_canonical() -> None:
    a = Literal(qvar("a"))
    b = Literal(qvar("b"), negated=True)
    assert make_condition([b, a, b]) == (a, b)


def test_make_condition_rejects_contradiction() -> None:
    a = Literal(qvar("a"))
    with pytest.raises(ValueError):
        make_condition([a, a.negate()])


def test_literal_kinds_do_not_clash() -> None:
    clause = make_condition([Literal(qvar("x")), Literal(cvar("x"), negated=True)])
    assert len(clause) == 2


def test_statement_equality_ignores_identity() -> None:
    a = Statement(Operation("X"), produced_quantum=(qvar("b"),), consumed=(qvar("a"),))
    b = Statement(
        Operation("X"), produced_quantum=(qvar("b"),), consumed=(qvar("a"),), sid=3, pair_tag="t"
    )
    assert a == b


def test_substitution_renames_widths_and_expressions() -> None:
    f = parse_function(
        """
        f[$n](a:$n) :=p {
          $m :=p $n + 1
          b:$n :=p X(a)
        } > b
        """
    )
    renamed = Substitution({cvar("n"): cvar("k")}).function(f)
    assert renamed.classical_in == (cvar("k"),)
    assert str(renamed.consumed_params[0].width) == "$k"
    assert str(renamed.body[0].op.static_args[0]) == "$k + 1"

    bound = Substitution(constants={"n": 3}).function(f)
    assert str(bound.consumed_params[0].width) == "3"


def test_fresh_name() -> None:
    taken = {"t", "t'"}
    assert fresh_name("t", taken) == "t''"
    assert "t''" in taken
    assert fresh_name("u", taken) == "u'"


def test_program_replace_drops_stale_derived() -> None:
    f = parse_function("f(a) :=p { b :=p X(a) } > b")
    g = parse_function("g(a) :=p { b :=p X(a) } > b")
    program = Program({"f": f, "g": g})
    program.remember(dataclasses.replace(f, modes=(ADJ,)))
    program.remember(dataclasses.replace(g, modes=(ADJ,)))
    replaced = program.replace(f)
    assert replaced.lookup(ModeKey("f", (ADJ,))) is None
    assert replaced.lookup(ModeKey("g", (ADJ,))) is not None
    assert program.lookup(ModeKey("f", (ADJ,))) is not None


def test_effect_order() -> None:
    assert Effect.PURE < Effect.QUANTUM < Effect.MEASURE
    assert Effect.from_symbol("q") is Effect.QUANTUM
    with pytest.raises(ValueError):
        Effect.from_symbol("z")
