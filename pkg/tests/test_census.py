from __future__ import annotations

import pytest

from unfab.census import CallCensus
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.pipeline import prepare
from unfab.sim import equiv_up_to_phase
from unfab.sim import simulate
from unfab.sim import SimulationResult
from unfab.sim import StateVector
from unfab.testing import load_program


def test_call_census_counts_by_direction() -> None:
    census = CallCensus()
    census.record(ModeKey("step"))
    census.record(ModeKey("step", (Mode.GARBAGE,)))
    census.record(ModeKey("step", (Mode.GARBAGE, Mode.ADJOINT)))
    census.record(ModeKey("iterate"))
    census.record_forget()
    assert census.count("step") == 3
    assert census.forward("step") == 2
    assert census.inverse("step") == 1
    assert census.total() == 4
    assert census.total(with_forgets=True) == 5
    other = CallCensus()
    other.record(ModeKey("step"))
    census.merge(other)
    assert census.count("step") == 4
    assert census.to_records() == [
        "iterate=1",
        "step=2",
        "step^G=1",
        "step^G^adj=1",
        "forget=1",
    ]


def _run(
    program_name: str, entry: str, n: int, *, prepared: bool, naive: bool = False
) -> SimulationResult:
    program = load_program(program_name)
    if prepared:
        program = prepare(program, naive=naive)
    state = StateVector.from_registers([("x", 1), ("y", 1)], {"x": 1})
    return simulate(program[entry], state, program=program, classical={"n": n})


@pytest.mark.parametrize("n", range(1, 11))
def test_source_program_calls_step_once_per_level(n: int) -> None:
    result = _run("iterate", "iterate", n, prepared=False)
    assert result.census.count("step") == n
    assert result.census.forgets == 2 * n


@pytest.mark.parametrize("n", range(1, 11))
def test_pipeline_census_is_linear(n: int) -> None:
    source = _run("iterate", "iterate", n, prepared=False)
    result = _run("iterate", "iterate", n, prepared=True)
    assert result.census.count("step") == 2 * n - 1
    assert result.census.count("step") <= 2 * source.census.count("step")
    assert result.census.forgets == 0
    # y' = y xor f^n(x) with f = not.
    expected = 1 ^ (n % 2)
    assert result.state.probabilities("y'")[expected] == pytest.approx(1.0)


@pytest.mark.parametrize("n", range(1, 9))
def test_naive_census_is_exponential(n: int) -> None:
    for name in ("iterate", "naive_iterate"):
        result = _run(name, name, n, prepared=True, naive=True)
        assert result.census.forward("step") == 2 ** (n - 1)
        assert result.census.inverse("step") == 2 ** (n - 1) - 1


@pytest.mark.parametrize("n", range(1, 11))
@pytest.mark.parametrize("name", ["iterate", "etareti"])
def test_pipeline_at_most_doubles_source_calls(name: str, n: int) -> None:
    source = _run(name, name, n, prepared=False)
    result = _run(name, name, n, prepared=True)
    assert source.census.count("step") > 0
    assert result.census.count("step") <= 2 * source.census.count("step")
    assert equiv_up_to_phase(source.state, result.state)
