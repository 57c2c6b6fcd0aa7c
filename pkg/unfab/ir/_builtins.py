from __future__ import annotations

import dataclasses

from unfab.ir._effect import Effect


@dataclasses.dataclass(frozen=True)
class BuiltinInfo:
    """Static description of a built-in operation.

    Args:
        name:
            Base name of the built-in.
        effect:
            Declared effect.
        bracket:
            Number of ``[...]`` arguments, :obj:`None` for any number.
        consumed:
            Number of ``(...)`` arguments, :obj:`None` for one or more.
        produced:
            Number of produced quantum variables.
        classical_out:
            Number of produced classical variables.
        static:
            Kind of static argument: ``"value"``, ``"angle"``, ``"arity"`` or ``"expr"``.
        inverse:
            Name of the built-in implementing the adjoint, if it is a different built-in.
        adjoint_alias:
            Printed name of the adjoint when it is spelled as a separate word.
        control:
            Whether the single bracket argument is a control that may be classical.

    """

    name: str
    effect: Effect
    bracket: int | None = 0
    consumed: int | None = 0
    produced: int = 0
    classical_out: int = 0
    static: str | None = None
    inverse: str | None = None
    adjoint_alias: str | None = None
    control: bool = False


BUILTINS: dict[str, BuiltinInfo] = {
    info.name: info
    for info in [
        BuiltinInfo("new", Effect.PURE, produced=1, static="value", adjoint_alias="unnew"),
        BuiltinInfo("X", Effect.PURE, consumed=1, produced=1),
        BuiltinInfo("H", Effect.QUANTUM, consumed=1, produced=1),
        BuiltinInfo("ry", Effect.QUANTUM, consumed=1, produced=1, static="angle"),
        BuiltinInfo("CX", Effect.PURE, bracket=1, consumed=1, produced=1),
        BuiltinInfo("phase", Effect.QUANTUM, static="angle"),
        BuiltinInfo("measure", Effect.MEASURE, consumed=1, classical_out=1),
        BuiltinInfo("forget", Effect.PURE, consumed=None),
        BuiltinInfo("dispose", Effect.PURE, consumed=1),
        BuiltinInfo("dup", Effect.PURE, bracket=1, produced=1, adjoint_alias="undup"),
        BuiltinInfo(
            "select",
            Effect.PURE,
            bracket=1,
            consumed=2,
            produced=1,
            inverse="distribute",
            control=True,
        ),
        BuiltinInfo(
            "distribute",
            Effect.PURE,
            bracket=1,
            consumed=1,
            produced=2,
            inverse="select",
            control=True,
        ),
        BuiltinInfo(
            "cat", Effect.PURE, consumed=None, produced=1, static="arity", inverse="uncat"
        ),
        BuiltinInfo("uncat", Effect.PURE, consumed=1, static="arity", inverse="cat"),
        BuiltinInfo("calc", Effect.PURE, bracket=None, classical_out=1, static="expr"),
    ]
}

_ALIASES = {info.adjoint_alias: info.name for info in BUILTINS.values() if info.adjoint_alias}


def is_builtin(name: str) -> bool:
    return name in BUILTINS


def builtin_info(name: str) -> BuiltinInfo:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError("'{}' is not a built-in operation.".format(name)) from None


def resolve_alias(name: str) -> str | None:
    """Return the built-in whose adjoint is spelled ``name`` (``undup`` -> ``dup``)."""
    return _ALIASES.get(name)
