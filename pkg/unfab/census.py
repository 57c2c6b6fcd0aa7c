from __future__ import annotations

import collections
import dataclasses

from unfab.ir import Mode
from unfab.ir import ModeKey


@dataclasses.dataclass
class CallCensus:
    """Dynamic count of user function calls, keyed by the called mode word, and of forgets.

    Both the interpreter and the unroller fill one while they run.
    """

    calls: collections.Counter[ModeKey] = dataclasses.field(default_factory=collections.Counter)
    forgets: int = 0

    def record(self, key: ModeKey) -> None:
        self.calls[key] += 1

    def record_forget(self) -> None:
        self.forgets += 1

    def count(self, name: str) -> int:
        """Calls of ``name`` in any mode."""
        return sum(n for key, n in self.calls.items() if key.base == name)

    def forward(self, name: str) -> int:
        return sum(
            n for key, n in self.calls.items() if key.base == name and _flips(key) % 2 == 0
        )

    def inverse(self, name: str) -> int:
        return sum(
            n for key, n in self.calls.items() if key.base == name and _flips(key) % 2 == 1
        )

    def total(self, *, with_forgets: bool = False) -> int:
        calls = sum(self.calls.values())
        return calls + self.forgets if with_forgets else calls

    def merge(self, other: CallCensus) -> None:
        self.calls.update(other.calls)
        self.forgets += other.forgets

    def to_records(self) -> list[str]:
        lines = ["{}={}".format(key, n) for key, n in sorted(self.calls.items(), key=_sort_key)]
        lines.append("forget={}".format(self.forgets))
        return lines


def _flips(key: ModeKey) -> int:
    return sum(1 for mode in key.modes if mode is Mode.ADJOINT)


def _sort_key(item: tuple[ModeKey, int]) -> str:
    return str(item[0])
