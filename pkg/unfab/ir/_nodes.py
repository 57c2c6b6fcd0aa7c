from __future__ import annotations

from collections.abc import Callable
from collections.abc import Iterable
from collections.abc import Iterator
from collections.abc import Mapping
import dataclasses
import enum
from typing import Any

from unfab.ir._builtins import BUILTINS
from unfab.ir._builtins import is_builtin
from unfab.ir._effect import Effect
from unfab.ir._expr import Expr
from unfab.ir._expr import Ref


class VarKind(enum.Enum):
    QUANTUM = "quantum"
    CLASSICAL = "classical"
    GARBAGE = "garbage"

    @property
    def prefix(self) -> str:
        return {"quantum": "", "classical": "$", "garbage": "%"}[self.value]


@dataclasses.dataclass(frozen=True)
class Var:
    """A variable of a function body.

    Variables are unique within a function body. ``width`` is the qubit count of a quantum
    variable; :obj:`None` stands for a single qubit. Classical and garbage variables carry no
    width.
    """

    name: str
    kind: VarKind = VarKind.QUANTUM
    width: Expr | None = None

    @property
    def ident(self) -> tuple[VarKind, str]:
        return (self.kind, self.name)

    @property
    def is_quantum(self) -> bool:
        return self.kind is VarKind.QUANTUM

    @property
    def is_classical(self) -> bool:
        return self.kind is VarKind.CLASSICAL

    @property
    def is_garbage(self) -> bool:
        return self.kind is VarKind.GARBAGE

    def __str__(self) -> str:
        return self.kind.prefix + self.name


def qvar(name: str, width: Expr | None = None) -> Var:
    return Var(name, VarKind.QUANTUM, width)


def cvar(name: str) -> Var:
    return Var(name, VarKind.CLASSICAL)


def gvar(name: str) -> Var:
    return Var(name, VarKind.GARBAGE)


@dataclasses.dataclass(frozen=True)
class Literal:
    var: Var
    negated: bool = False

    def negate(self) -> Literal:
        return Literal(self.var, not self.negated)

    def sort_key(self) -> tuple[str, str, bool]:
        return (self.var.name, self.var.kind.value, self.negated)

    def __str__(self) -> str:
        return ("!" if self.negated else "") + str(self.var)


def make_condition(literals: Iterable[Literal]) -> tuple[Literal, ...]:
    """Return a clause in canonical form: sorted and deduplicated.

    Raises:
        :exc:`ValueError`:
            If the clause contains a literal and its negation.

    """
    clause = tuple(sorted(set(literals), key=Literal.sort_key))
    seen: dict[tuple[VarKind, str], bool] = {}
    for literal in clause:
        previous = seen.setdefault(literal.var.ident, literal.negated)
        if previous != literal.negated:
            raise ValueError("Condition contains both {0} and !{0}.".format(literal.var))
    return clause


class Mode(enum.Enum):
    ADJOINT = "adj"
    GARBAGE = "G"
    CLASSICAL = "O"


def canonical_modes(modes: Iterable[Mode]) -> tuple[Mode, ...]:
    """Normalise a mode word.

    Two consecutive adjoints cancel and the classical projection absorbs every mode applied
    before it, so ``f^adj^adj`` is ``f`` and ``f^G^O`` is ``f^O``.
    """
    out: list[Mode] = []
    for mode in modes:
        if mode is Mode.CLASSICAL:
            out = [Mode.CLASSICAL]
        elif out and out[-1] is Mode.CLASSICAL:
            if mode is Mode.GARBAGE:
                raise ValueError("The classical projection has no garbage mode.")
        elif mode is Mode.ADJOINT and out and out[-1] is Mode.ADJOINT:
            out.pop()
        else:
            out.append(mode)
    return tuple(out)


def format_modes(modes: Iterable[Mode]) -> str:
    return "".join("^" + mode.value for mode in modes)


@dataclasses.dataclass(frozen=True)
class ModeKey:
    """Cache key of a derived function: a base name and an ordered mode word.

    ``ModeKey("f", (GARBAGE, ADJOINT))`` is the adjoint of the garbage variant and consumes
    garbage, while ``ModeKey("f", (ADJOINT, GARBAGE))`` is the garbage variant of the adjoint.
    """

    base: str
    modes: tuple[Mode, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", canonical_modes(self.modes))

    @property
    def adjoint(self) -> bool:
        return self.modes[-1:] == (Mode.ADJOINT,)

    @property
    def garbage(self) -> bool:
        return Mode.GARBAGE in self.modes

    @property
    def classical_only(self) -> bool:
        return self.modes == (Mode.CLASSICAL,)

    @property
    def parent(self) -> ModeKey:
        return ModeKey(self.base, self.modes[:-1])

    def __str__(self) -> str:
        return self.base + format_modes(self.modes)


@dataclasses.dataclass(frozen=True)
class Operation:
    """A built-in or user function reference decorated with modes.

    ``static_args`` holds constants bound at the operation: the allocation value of ``new``,
    the angle (a multiple of pi) of ``phase``/``ry``, the arity followed by the width
    expressions of ``cat``/``uncat`` and the expression of ``calc``.
    """

    target: str
    modes: tuple[Mode, ...] = ()
    static_args: tuple[Any, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", canonical_modes(self.modes))

    @property
    def is_builtin(self) -> bool:
        return is_builtin(self.target)

    @property
    def key(self) -> ModeKey:
        return ModeKey(self.target, self.modes)

    @property
    def adjoint(self) -> bool:
        return self.modes[-1:] == (Mode.ADJOINT,)

    @property
    def garbage(self) -> bool:
        return Mode.GARBAGE in self.modes

    @property
    def classical_only(self) -> bool:
        return self.modes == (Mode.CLASSICAL,)

    @property
    def produces_garbage(self) -> bool:
        return self.modes[-1:] == (Mode.GARBAGE,)

    @property
    def consumes_garbage(self) -> bool:
        return self.modes[-2:] == (Mode.GARBAGE, Mode.ADJOINT)

    def is_(self, name: str) -> bool:
        """Whether this is the built-in ``name`` in any mode."""
        return self.target == name

    def with_mode(self, mode: Mode) -> Operation:
        return dataclasses.replace(self, modes=self.modes + (mode,))

    def inverse(self) -> Operation:
        """Return the adjoint operation.

        Built-ins with a named inverse (``cat``/``uncat``, ``select``/``distribute``) swap
        names when no other mode is applied; everything else toggles a trailing adjoint.
        """
        if not self.modes and self.is_builtin:
            named = BUILTINS[self.target].inverse
            if named is not None:
                return dataclasses.replace(self, target=named)
        return self.with_mode(Mode.ADJOINT)

    def flip_count(self) -> int:
        return sum(1 for mode in self.modes if mode is Mode.ADJOINT)

    def __str__(self) -> str:
        from unfab.textfmt._printer import format_operation

        return format_operation(self)


@dataclasses.dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return "{}:{}:{}".format(self.file, self.line, self.col)


@dataclasses.dataclass(frozen=True)
class Statement:
    """One combined define/call statement.

    ``conserved`` is the bracket list (classical or quantum), ``consumed`` the parenthesised
    list and ``condition`` a conjunctive clause kept in canonical order. ``sid`` is a stable
    identity used by passes that insert while iterating; ``pair_tag`` links a compute
    statement to its synthesized uncomputation. Neither takes part in equality.
    """

    op: Operation
    effect: Effect = Effect.PURE
    produced_classical: tuple[Var, ...] = ()
    produced_quantum: tuple[Var, ...] = ()
    conserved: tuple[Var, ...] = ()
    consumed: tuple[Var, ...] = ()
    condition: tuple[Literal, ...] = ()
    sid: int = dataclasses.field(default=-1, compare=False)
    pair_tag: str | None = dataclasses.field(default=None, compare=False)
    span: SourceSpan | None = dataclasses.field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "condition", make_condition(self.condition))

    @property
    def produced(self) -> tuple[Var, ...]:
        return self.produced_classical + self.produced_quantum

    @property
    def condition_vars(self) -> tuple[Var, ...]:
        return tuple(literal.var for literal in self.condition)

    def static_exprs(self) -> Iterator[Expr]:
        for arg in self.op.static_args:
            if isinstance(arg, Expr):
                yield arg

    def used_vars(self) -> tuple[Var, ...]:
        """Variables read without being consumed: bracket arguments and condition literals."""
        return self.conserved + self.condition_vars

    def referenced_classical(self) -> frozenset[str]:
        names: set[str] = set()
        for expr in self.static_exprs():
            names |= expr.free_vars()
        for var in self.produced + self.consumed + self.conserved:
            if var.width is not None:
                names |= var.width.free_vars()
        return frozenset(names)

    def map_vars(
        self, var_fn: Callable[[Var], Var], expr_fn: Callable[[Expr], Expr] | None = None
    ) -> Statement:
        op = self.op
        if expr_fn is not None and any(isinstance(arg, Expr) for arg in op.static_args):
            op = dataclasses.replace(
                op,
                static_args=tuple(
                    expr_fn(arg) if isinstance(arg, Expr) else arg for arg in op.static_args
                ),
            )
        return dataclasses.replace(
            self,
            op=op,
            produced_classical=tuple(var_fn(v) for v in self.produced_classical),
            produced_quantum=tuple(var_fn(v) for v in self.produced_quantum),
            conserved=tuple(var_fn(v) for v in self.conserved),
            consumed=tuple(var_fn(v) for v in self.consumed),
            condition=tuple(Literal(var_fn(lit.var), lit.negated) for lit in self.condition),
        )

    def with_condition(self, condition: Iterable[Literal]) -> Statement:
        return dataclasses.replace(self, condition=tuple(condition))

    def __str__(self) -> str:
        from unfab.textfmt._printer import format_statement

        return format_statement(self)


@dataclasses.dataclass(frozen=True)
class FunctionDef:
    """A function definition ``name[classical, conserved](consumed) := {body} > returns``.

    Derived definitions (adjoints, garbage variants, classical projections) keep the base
    ``name`` and record their ``modes``. ``bin`` is the garbage bin of a garbage-mode body: it
    is returned last by ``f^G`` and consumed last by ``f^G^adj``; ``dispose`` statements feed
    it implicitly. ``bin_width`` is the qubit count of the bin as a classical expression over
    the function's classical variables, or :obj:`None` when it is unknown.
    """

    name: str
    classical_in: tuple[Var, ...] = ()
    conserved_params: tuple[Var, ...] = ()
    consumed_params: tuple[Var, ...] = ()
    body: tuple[Statement, ...] = ()
    returned_classical: tuple[Var, ...] = ()
    returned_quantum: tuple[Var, ...] = ()
    declared_effect: Effect = Effect.PURE
    modes: tuple[Mode, ...] = ()
    bin: Var | None = None
    span: SourceSpan | None = dataclasses.field(default=None, compare=False)
    bin_width: Expr | None = dataclasses.field(default=None, compare=False)

    @property
    def key(self) -> ModeKey:
        return ModeKey(self.name, self.modes)

    @property
    def params(self) -> tuple[Var, ...]:
        return self.classical_in + self.conserved_params + self.consumed_params

    @property
    def returns(self) -> tuple[Var, ...]:
        return self.returned_classical + self.returned_quantum

    @property
    def input_bin(self) -> bool:
        return self.bin is not None and self.bin in self.consumed_params

    @property
    def output_bin(self) -> bool:
        return self.bin is not None and self.bin in self.returned_quantum

    def map_vars(
        self, var_fn: Callable[[Var], Var], expr_fn: Callable[[Expr], Expr] | None = None
    ) -> FunctionDef:
        return dataclasses.replace(
            self,
            classical_in=tuple(var_fn(v) for v in self.classical_in),
            conserved_params=tuple(var_fn(v) for v in self.conserved_params),
            consumed_params=tuple(var_fn(v) for v in self.consumed_params),
            body=tuple(s.map_vars(var_fn, expr_fn) for s in self.body),
            returned_classical=tuple(var_fn(v) for v in self.returned_classical),
            returned_quantum=tuple(var_fn(v) for v in self.returned_quantum),
            bin=None if self.bin is None else var_fn(self.bin),
            bin_width=(
                self.bin_width
                if expr_fn is None or self.bin_width is None
                else expr_fn(self.bin_width)
            ),
        )

    def with_body(self, body: Iterable[Statement]) -> FunctionDef:
        return dataclasses.replace(self, body=tuple(body))

    def all_vars(self) -> dict[tuple[VarKind, str], Var]:
        found: dict[tuple[VarKind, str], Var] = {}
        for var in self.params + self.returns:
            found.setdefault(var.ident, var)
        for stmt in self.body:
            for var in stmt.produced + stmt.consumed + stmt.used_vars():
                found.setdefault(var.ident, var)
        return found

    def __str__(self) -> str:
        from unfab.textfmt._printer import format_function

        return format_function(self)


@dataclasses.dataclass
class Program:
    """Name-indexed collection of function definitions plus a cache of derived functions."""

    functions: dict[str, FunctionDef] = dataclasses.field(default_factory=dict)
    derived: dict[ModeKey, FunctionDef] = dataclasses.field(default_factory=dict)

    def __getitem__(self, name: str) -> FunctionDef:
        return self.functions[name]

    def __contains__(self, name: object) -> bool:
        return name in self.functions

    def lookup(self, key: ModeKey) -> FunctionDef | None:
        if not key.modes:
            return self.functions.get(key.base)
        return self.derived.get(key)

    def remember(self, function: FunctionDef) -> FunctionDef:
        """Insert a derived function unless one is cached already; return the cached one."""
        return self.derived.setdefault(function.key, function)

    def replace(self, function: FunctionDef) -> Program:
        functions = dict(self.functions)
        functions[function.name] = function
        # Derived functions of the replaced base are stale.
        derived = {k: v for k, v in self.derived.items() if k.base != function.name}
        return Program(functions, derived)

    def copy(self) -> Program:
        return Program(dict(self.functions), dict(self.derived))


class Substitution:
    """Consistent renaming of variables, including references inside expressions and widths.

    Args:
        variables:
            Replacement of variables, matched by kind and name.
        constants:
            Values substituted for classical variable references inside expressions.

    """

    def __init__(
        self,
        variables: Mapping[Var, Var] | None = None,
        constants: Mapping[str, int] | None = None,
    ) -> None:
        from unfab.ir._expr import Const

        self._vars: dict[tuple[VarKind, str], Var] = {}
        self._exprs: dict[str, Expr] = {}
        for name, value in (constants or {}).items():
            self._exprs[name] = Const(value)
        for old, new in (variables or {}).items():
            self._vars[old.ident] = new
            if old.is_classical:
                self._exprs[old.name] = Ref(new.name)

    def var(self, var: Var) -> Var:
        new = self._vars.get(var.ident)
        if new is not None:
            return new
        if var.width is not None and self._exprs:
            width = var.width.substitute(self._exprs)
            if width != var.width:
                return dataclasses.replace(var, width=width)
        return var

    def expr(self, expr: Expr) -> Expr:
        return expr.substitute(self._exprs) if self._exprs else expr

    def statement(self, stmt: Statement) -> Statement:
        return stmt.map_vars(self.var, self.expr)

    def function(self, function: FunctionDef) -> FunctionDef:
        return function.map_vars(self.var, self.expr)


def fresh_name(base: str, taken: set[str], suffix: str = "'") -> str:
    """Return ``base`` followed by as many ``suffix`` characters as needed to be unused."""
    name = base + suffix
    while name in taken:
        name += suffix
    taken.add(name)
    return name
