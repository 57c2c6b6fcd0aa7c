from __future__ import annotations

import pytest

from unfab.pipeline import prepare
from unfab.sim import check_conserved
from unfab.sim import SimConfig
from unfab.testing import load_program


@pytest.mark.parametrize(
    "name, entry",
    [("maj", "maj"), ("controlled", "cx_via_distribute"), ("controlled", "Z"), ("epr", "copy")],
)
def test_conserved_parameters_keep_their_branch_norms(name: str, entry: str) -> None:
    program = prepare(load_program(name))
    assert check_conserved(program[entry], trials=20, config=SimConfig(seed=0), program=program)


def test_hadamard_does_not_conserve_its_input() -> None:
    program = load_program("epr")
    assert not check_conserved(
        program["EPR"],
        ["a"],
        trials=5,
        config=SimConfig(seed=0),
        program=program,
        renames={"a": "a'"},
    )


def test_cx_target_is_not_conserved() -> None:
    program = load_program("controlled")
    assert not check_conserved(
        program["cx_via_distribute"],
        ["b"],
        trials=5,
        config=SimConfig(seed=0),
        program=program,
        renames={"b": "b'"},
    )
