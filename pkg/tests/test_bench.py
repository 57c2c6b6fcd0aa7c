from __future__ import annotations

import io

import pytest

from unfab.bench import bench_scaling
from unfab.bench import BenchRow
from unfab.bench import parse_range
from unfab.bench import write_csv
from unfab.lower import LowerConfig


@pytest.mark.parametrize(
    "text, expected", [("1..4", range(1, 5)), ("3", range(3, 4)), ("0..0", range(0, 1))]
)
def test_parse_range(text: str, expected: range) -> None:
    assert parse_range(text) == expected


def test_pipeline_iterate_is_linear() -> None:
    rows = bench_scaling("iterate", "pipeline", range(1, 11))
    assert [row.census for row in rows] == [2 * n - 1 for n in range(1, 11)]
    assert all(row.status == "ok" for row in rows)
    steps = {rows[i + 1].gates - rows[i].gates for i in range(len(rows) - 1)}
    assert len(steps) == 1


def test_naive_iterate_is_exponential() -> None:
    rows = bench_scaling("iterate", "naive", range(1, 9))
    assert [row.forward for row in rows] == [2 ** (n - 1) for n in range(1, 9)]
    assert [row.inverse for row in rows] == [2 ** (n - 1) - 1 for n in range(1, 9)]
    assert [row.census for row in rows] == [2**n - 1 for n in range(1, 9)]


def test_etareti_gates_are_affine() -> None:
    rows = bench_scaling("etareti", "pipeline", range(2, 11))
    steps = {rows[i + 1].gates - rows[i].gates for i in range(len(rows) - 1)}
    assert len(steps) == 1
    assert all(row.qubits > 0 for row in rows)


def test_exhausted_fuel_gives_a_status_row() -> None:
    (row,) = bench_scaling("iterate", "naive", [8], LowerConfig(fuel=10))
    assert row == BenchRow(8, 0, 0, 0, 0, 0, 0, 0, status="fuel")


def test_unknown_family_or_mode() -> None:
    with pytest.raises(ValueError, match="family"):
        bench_scaling("nope", "pipeline", [1])
    with pytest.raises(ValueError, match="mode"):
        bench_scaling("iterate", "nope", [1])


def test_write_csv() -> None:
    stream = io.StringIO()
    write_csv([BenchRow(1, 2, 3, 5, 4, 1, 1, 0)], stream)
    assert stream.getvalue() == (
        "n,single,cx,gates,qubits,census,forward,inverse,status\n1,2,3,5,4,1,1,0,ok\n"
    )


@pytest.mark.parametrize("family", ["iterate", "etareti"])
def test_pipeline_census_grows_linearly(family: str) -> None:
    rows = bench_scaling(family, "pipeline", range(1, 11))
    assert all(row.status == "ok" for row in rows)
    steps = {rows[i + 1].census - rows[i].census for i in range(len(rows) - 1)}
    assert len(steps) == 1
