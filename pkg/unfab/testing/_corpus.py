from __future__ import annotations

import dataclasses
from importlib import resources

from unfab.ir import FunctionDef
from unfab.ir import Program
from unfab.textfmt import parse_program


def program_names() -> list[str]:
    """Names of the bundled programs, without the ``.uir`` suffix."""
    folder = resources.files("unfab").joinpath("programs")
    return sorted(p.name[: -len(".uir")] for p in folder.iterdir() if p.name.endswith(".uir"))


def program_text(name: str) -> str:
    return resources.files("unfab").joinpath("programs").joinpath(name + ".uir").read_text()


def load_program(name: str) -> Program:
    return parse_program(program_text(name), file=name + ".uir")


@dataclasses.dataclass(frozen=True)
class CorpusCase:
    """A measure-free, well-forgotten bundled function with fixed classical arguments."""

    program: str
    entry: str
    classical: tuple[tuple[str, int], ...] = ()

    @property
    def args(self) -> dict[str, int]:
        return dict(self.classical)

    def load(self) -> tuple[Program, FunctionDef]:
        program = load_program(self.program)
        return program, program[self.entry]

    def __str__(self) -> str:
        args = ",".join("{}={}".format(k, v) for k, v in self.classical)
        return "{}:{}".format(self.program, self.entry) + ("[{}]".format(args) if args else "")


CORPUS: list[CorpusCase] = [
    CorpusCase("maj", "maj"),
    CorpusCase("epr", "EPR"),
    CorpusCase("epr", "copy"),
    CorpusCase("epr", "bell"),
    CorpusCase("slow_id", "slow_id"),
    CorpusCase("extract", "extract", (("n", 3), ("i", 1))),
    CorpusCase("extract", "extract", (("n", 4), ("i", 0))),
    CorpusCase("controlled", "Z"),
    CorpusCase("controlled", "cx_via_distribute"),
    CorpusCase("inject", "f_inj"),
    CorpusCase("teleport", "epr"),
    CorpusCase("iterate", "step"),
    CorpusCase("iterate", "iterate", (("n", 0),)),
    CorpusCase("iterate", "iterate", (("n", 1),)),
    CorpusCase("iterate", "iterate", (("n", 3),)),
    CorpusCase("etareti", "etareti", (("n", 1),)),
    CorpusCase("etareti", "etareti", (("n", 2),)),
]
