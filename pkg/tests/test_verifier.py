from __future__ import annotations

import pytest

from unfab.exceptions import VerificationError
from unfab.ir import qvar
from unfab.testing import load_program
from unfab.testing import program_names
from unfab.textfmt import parse_function
from unfab.verifier import check_bracketing
from unfab.verifier import check_conditions
from unfab.verifier import check_effects
from unfab.verifier import check_well_forgotten
from unfab.verifier import ensure_valid
from unfab.verifier import ForgetFailure
from unfab.verifier import forgettable_at
from unfab.verifier import ForgettableWitness
from unfab.verifier import verify_function
from unfab.verifier import verify_program


@pytest.mark.parametrize("name", [n for n in program_names() if n not in ("bad", "hard")])
def test_bundled_programs_verify(name: str) -> None:
    assert verify_program(load_program(name)) == []


def test_maj_is_well_forgotten() -> None:
    f = load_program("maj")["maj"]
    witness = forgettable_at(f, qvar("x"), 5)
    assert isinstance(witness, ForgettableWitness)
    assert witness.producer == 1
    assert [(v.name, i) for v, i in witness.chain] == [("x", 1), ("t", 0)]


def test_forgetting_superposition_is_rejected() -> None:
    (diagnostic,) = verify_program(load_program("bad"))
    assert diagnostic.code == "NotForgettable"
    assert diagnostic.function == "BAD"
    assert diagnostic.statement == 2
    assert "effect q" in diagnostic.message


def test_forgetting_a_parameter_is_rejected() -> None:
    program = load_program("hard")
    assert verify_function(program["f_inj"], program) == []
    (diagnostic,) = verify_function(program["HARD"], program)
    assert diagnostic.code == "NotForgettable"
    result = forgettable_at(program["HARD"], qvar("x"), 1)
    assert isinstance(result, ForgetFailure)
    assert not result
    assert result.code == "NoProducer"


def test_dependency_must_be_recoverable() -> None:
    f = parse_function(
        """
        f(a) :=p {
          b :=p dup[a]
          a' :=p X(a)
          :=p forget(b)
        } > a'
        """
    )
    result = forgettable_at(f, qvar("b"), 2)
    assert isinstance(result, ForgetFailure)
    assert result.code == "DependencyUnavailable"
    assert result.root().code == "NoProducer"


def test_forget_condition_must_imply_producer_condition() -> None:
    f = parse_function(
        """
        f[c, a] :=p {
          b :=p dup[a] if c
          :=p forget(b) if c
          d :=p dup[a]
          :=p forget(d) if c
        } >
        """
    )
    assert isinstance(forgettable_at(f, qvar("b"), 1), ForgettableWitness)
    assert isinstance(forgettable_at(f, qvar("d"), 3), ForgettableWitness)
    g = parse_function(
        """
        g[c, a] :=p {
          b :=p dup[a] if c
          :=p forget(b)
        } >
        """
    )
    result = forgettable_at(g, qvar("b"), 1)
    assert isinstance(result, ForgetFailure)
    assert result.code == "ConditionNotImplied"


def test_check_conditions() -> None:
    f = parse_function("f[c, a] :=p { b :=p dup[a] if c; :=p undup[a](b) } >")
    assert [d.code for d in check_conditions(f)] == ["ConditionMismatch"]
    g = parse_function("g[c, a] :=p { b :=p dup[a] if c } > b")
    assert [d.code for d in check_conditions(g)] == ["ConditionMismatch"]
    # Consuming an unconditional parameter under a clause leaves it undefined otherwise.
    k = parse_function("k[c](a) :=p { b :=p X(a) if c } > b")
    assert [d.code for d in check_conditions(k)] == ["ConditionMismatch"] * 2
    h = parse_function(
        "h[c](a) :=p { b :=p dup[c] if c; a' :=p CX[b](a); :=p undup[c](b) if c } > a'"
    )
    assert [d.code for d in check_conditions(h)] == ["ConditionNotImplied"]


def test_branch_copies_absorb_the_control() -> None:
    program = load_program("controlled")
    assert check_conditions(program["cx_via_distribute"]) == []


def test_check_effects() -> None:
    f = parse_function("f(a) :=p { b :=p H(a) } > b")
    assert [d.code for d in check_effects(f)] == ["EffectMismatch"]
    g = parse_function("g(a) :=q { b :=q X(a) } > b")
    assert check_effects(g) == []


@pytest.mark.parametrize(
    "body, codes",
    [
        ("b :=p dup[a] @t; :=p undup[a](b) @t", []),
        ("b :=p dup[a] @t; :=p undup[a](b)", ["UnpairedTag"]),
        ("b :=p dup[a] @t; c :=p X(b) @t; :=p undup[a](c)", ["BracketMismatch"]),
        ("b :=p dup[a] if c @t; :=p undup[a](b) @t", ["BracketCondition"]),
    ],
)
def test_check_bracketing(body: str, codes: list[str]) -> None:
    f = parse_function("f[a, c] :=p { " + body + " } >")
    assert [d.code for d in check_bracketing(f)] == codes


def test_ensure_valid_raises_with_diagnostics() -> None:
    program = load_program("bad")
    with pytest.raises(VerificationError) as e:
        ensure_valid(program["BAD"], program)
    assert [d.code for d in e.value.diagnostics] == ["NotForgettable"]
    assert "NotForgettable" in str(e.value)


def test_check_well_forgotten() -> None:
    assert check_well_forgotten(load_program("maj")["maj"]) == []
    (diagnostic,) = check_well_forgotten(load_program("bad")["BAD"])
    assert (diagnostic.statement, diagnostic.var) == (2, "a'")
