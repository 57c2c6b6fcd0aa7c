from __future__ import annotations

import enum


class Effect(enum.IntEnum):
    """Effect annotation of a statement or function.

    Effects are totally ordered: ``PURE < QUANTUM < MEASURE``. A pure statement permutes
    computational basis states, a quantum statement may create superposition or apply phases,
    and a measuring statement collapses state.
    """

    PURE = 0
    QUANTUM = 1
    MEASURE = 2

    @property
    def symbol(self) -> str:
        return "pqm"[self.value]

    @classmethod
    def from_symbol(cls, symbol: str) -> Effect:
        try:
            return cls("pqm".index(symbol))
        except ValueError:
            raise ValueError("Unknown effect symbol '{}'.".format(symbol)) from None
