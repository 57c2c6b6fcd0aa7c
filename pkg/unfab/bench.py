from __future__ import annotations

from collections.abc import Iterable
import csv
import dataclasses
from typing import TextIO

from optuna._experimental import experimental_func
from optuna.logging import get_logger

from unfab.census import CallCensus
from unfab.exceptions import FuelExhaustedError
from unfab.lower import gate_count
from unfab.lower import lower_entry
from unfab.lower import LowerConfig
from unfab.pipeline import prepare
from unfab.testing import load_program


_logger = get_logger(__name__)

# Bundled program, entry and the base operation whose calls are counted.
FAMILIES = {
    "iterate": ("iterate", "iterate", "step"),
    "etareti": ("etareti", "etareti", "step"),
}
MODES = ("pipeline", "naive")


@dataclasses.dataclass(frozen=True)
class BenchRow:
    n: int
    single: int
    cx: int
    gates: int
    qubits: int
    census: int
    forward: int
    inverse: int
    status: str = "ok"


def parse_range(text: str) -> range:
    """Parse ``"1..10"`` (inclusive) or a single ``"5"``."""
    if ".." in text:
        start, stop = text.split("..", 1)
        return range(int(start), int(stop) + 1)
    return range(int(text), int(text) + 1)


@experimental_func("0.1.0")
def bench_scaling(
    family: str, mode: str, n_range: Iterable[int], config: LowerConfig | None = None
) -> list[BenchRow]:
    """Lower a recursive benchmark for every ``n`` and count gates and base calls.

    ``pipeline`` lowers the program with connected garbage; ``naive`` uncomputes every
    function eagerly and recomputes callees by plain adjoints, which makes the number of
    base calls exponential in ``n``.

    Args:
        family:
            ``iterate`` or ``etareti``.
        mode:
            ``pipeline`` or ``naive``.
        n_range:
            Values of ``$n``.
        config:
            Lowering limits; exhausting the fuel yields a row with status ``fuel``.

    Returns:
        One row per ``n``.

    """
    if family not in FAMILIES:
        raise ValueError("Unknown benchmark family '{}'.".format(family))
    if mode not in MODES:
        raise ValueError("Unknown benchmark mode '{}'.".format(mode))
    name, entry, base = FAMILIES[family]
    program = prepare(load_program(name), naive=(mode == "naive"))
    rows = []
    for n in n_range:
        census = CallCensus()
        try:
            circuit = lower_entry(program, entry, {"n": n}, config, census=census)
        except FuelExhaustedError as e:
            _logger.warning("{} n={} ({}): {}".format(family, n, mode, e))
            rows.append(BenchRow(n, 0, 0, 0, 0, 0, 0, 0, status="fuel"))
            continue
        count = gate_count(circuit)
        rows.append(
            BenchRow(
                n=n,
                single=count.single,
                cx=count.cx,
                gates=count.total,
                qubits=count.qubits,
                census=census.count(base),
                forward=census.forward(base),
                inverse=census.inverse(base),
            )
        )
        _logger.debug("{} n={} ({}): {}".format(family, n, mode, rows[-1]))
    return rows


def write_csv(rows: Iterable[BenchRow], stream: TextIO) -> None:
    fields = [f.name for f in dataclasses.fields(BenchRow)]
    writer = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(dataclasses.asdict(row))
