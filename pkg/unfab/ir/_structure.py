from __future__ import annotations

from collections.abc import Iterable
from collections.abc import Sequence
import dataclasses

from unfab.exceptions import KindMismatchError
from unfab.ir._builtins import BUILTINS
from unfab.ir._diagnostics import Diagnostic
from unfab.ir._effect import Effect
from unfab.ir._expr import Expr
from unfab.ir._expr import Ref
from unfab.ir._nodes import FunctionDef
from unfab.ir._nodes import Literal
from unfab.ir._nodes import Mode
from unfab.ir._nodes import Operation
from unfab.ir._nodes import Program
from unfab.ir._nodes import Statement
from unfab.ir._nodes import Var
from unfab.ir._nodes import VarKind


@dataclasses.dataclass(frozen=True)
class Signature:
    """Operand counts of an operation in a given mode.

    ``None`` stands for "any number". ``classical_bracket`` is the number of leading bracket
    arguments that must be classical; ``flexible_bracket`` marks control arguments that may be
    either classical or quantum.
    """

    effect: Effect
    bracket: int | None
    classical_bracket: int | None
    consumed: int | None
    produced: int | None
    classical_out: int
    garbage_in: int = 0
    garbage_out: int = 0
    flexible_bracket: bool = False


def _builtin_signature(op: Operation) -> Signature:
    info = BUILTINS[op.target]
    consumed = info.consumed
    produced: int | None = info.produced
    if info.static == "arity":
        arity = int(op.static_args[0]) if op.static_args else None
        if op.target == "cat":
            consumed = arity
        else:
            produced = arity
    classical_bracket: int | None = 0
    if op.target == "calc":
        classical_bracket = None
    return Signature(
        effect=info.effect,
        bracket=info.bracket,
        classical_bracket=classical_bracket,
        consumed=consumed,
        produced=produced,
        classical_out=info.classical_out,
        flexible_bracket=info.control,
    )


def _user_signature(function: FunctionDef, effect: Effect) -> Signature:
    bracket = len(function.classical_in) + len(function.conserved_params)
    garbage_in = sum(1 for v in function.consumed_params if v.is_garbage)
    garbage_out = sum(1 for v in function.returned_quantum if v.is_garbage)
    return Signature(
        effect=effect,
        bracket=bracket,
        classical_bracket=len(function.classical_in),
        consumed=len(function.consumed_params) - garbage_in,
        produced=len(function.returned_quantum) - garbage_out,
        classical_out=len(function.returned_classical),
        garbage_in=garbage_in,
        garbage_out=garbage_out,
    )


def _apply_modes(sig: Signature, modes: Iterable[Mode]) -> Signature:
    for mode in modes:
        if mode is Mode.ADJOINT:
            sig = dataclasses.replace(
                sig,
                consumed=sig.produced,
                produced=sig.consumed,
                garbage_in=sig.garbage_out,
                garbage_out=sig.garbage_in,
                classical_out=0,
            )
        elif mode is Mode.GARBAGE:
            sig = dataclasses.replace(sig, garbage_out=sig.garbage_out + 1)
        else:
            sig = dataclasses.replace(
                sig,
                effect=Effect.PURE,
                bracket=sig.classical_bracket,
                consumed=0,
                produced=0,
                garbage_in=0,
                garbage_out=0,
                flexible_bracket=False,
            )
    return sig


def signature(op: Operation, program: Program | None = None) -> Signature:
    """Return the operand signature of ``op``.

    Raises:
        :exc:`ValueError`:
            If ``op`` names a user function missing from ``program``.

    """
    if op.is_builtin:
        return _apply_modes(_builtin_signature(op), op.modes)
    if program is None or op.target not in program:
        raise ValueError("Unresolved callee '{}'.".format(op.target))
    function = program[op.target]
    return _apply_modes(_user_signature(function, effect_of(function, program)), op.modes)


def op_effect(op: Operation, program: Program | None = None) -> Effect:
    if op.classical_only:
        return Effect.PURE
    if op.is_builtin:
        return BUILTINS[op.target].effect
    if program is None or op.target not in program:
        raise ValueError("Unresolved callee '{}'.".format(op.target))
    return effect_of(program[op.target], program)


def make_statement(
    op: Operation,
    conserved: Sequence[Var] = (),
    consumed: Sequence[Var] = (),
    produced: Sequence[Var] = (),
    condition: Sequence[Literal] = (),
    *,
    produced_classical: Sequence[Var] = (),
    program: Program | None = None,
) -> Statement:
    """Build a statement, checking operand kinds against the signature of ``op``.

    Args:
        op:
            The operation to call.
        conserved:
            The bracket arguments.
        consumed:
            The parenthesised arguments, garbage variables last.
        produced:
            The produced quantum and garbage variables, garbage variables last.
        condition:
            Literals of the conjunctive condition clause.
        produced_classical:
            The produced classical variables.
        program:
            Program resolving user function targets.

    Returns:
        A statement whose effect is the declared effect of ``op``.

    Raises:
        :exc:`~unfab.exceptions.KindMismatchError`:
            If an operand has the wrong kind or the operand counts do not match.

    """
    sig = signature(op, program)
    _check_operands(op, sig, list(conserved), list(consumed), list(produced), produced_classical)
    effect = op_effect(op, program)
    if condition and effect >= Effect.MEASURE:
        raise KindMismatchError("Measuring operation '{}' cannot be controlled.".format(op))
    return Statement(
        op=op,
        effect=effect,
        produced_classical=tuple(produced_classical),
        produced_quantum=tuple(produced),
        conserved=tuple(conserved),
        consumed=tuple(consumed),
        condition=tuple(condition),
    )


def _split_garbage(vars_: list[Var], count: int, what: str, op: Operation) -> list[Var]:
    if count == 0:
        return vars_
    head, tail = vars_[: len(vars_) - count], vars_[len(vars_) - count :]
    if len(tail) != count or not all(v.is_garbage for v in tail):
        raise KindMismatchError("'{}' expects {} garbage {}.".format(op, count, what))
    return head


def _check_count(expected: int | None, actual: int, what: str, op: Operation) -> None:
    if expected is None:
        if actual == 0 and what == "consumed arguments":
            raise KindMismatchError("'{}' expects at least one {}.".format(op, what[:-1]))
        return
    if expected != actual:
        raise KindMismatchError("'{}' expects {} {}, got {}.".format(op, expected, what, actual))


def _check_operands(
    op: Operation,
    sig: Signature,
    conserved: list[Var],
    consumed: list[Var],
    produced: list[Var],
    produced_classical: Sequence[Var],
) -> None:
    _check_count(sig.bracket, len(conserved), "bracket arguments", op)
    for index, var in enumerate(conserved):
        if var.is_garbage:
            raise KindMismatchError("Garbage variable {} cannot be conserved.".format(var))
        must_be_classical = sig.classical_bracket is None or index < sig.classical_bracket
        if must_be_classical and not var.is_classical:
            raise KindMismatchError("'{}' expects {} to be classical.".format(op, var))
        if not must_be_classical and var.is_classical and not sig.flexible_bracket:
            raise KindMismatchError("'{}' expects {} to be quantum.".format(op, var))
    consumed = _split_garbage(consumed, sig.garbage_in, "inputs", op)
    produced = _split_garbage(produced, sig.garbage_out, "outputs", op)
    _check_count(sig.consumed, len(consumed), "consumed arguments", op)
    _check_count(sig.produced, len(produced), "produced variables", op)
    if sig.classical_out != len(produced_classical):
        raise KindMismatchError(
            "'{}' produces {} classical values, got {}.".format(
                op, sig.classical_out, len(produced_classical)
            )
        )
    disposing = op.target == "dispose" and not op.modes
    restoring = op.target == "dispose" and op.adjoint
    for var in consumed:
        if var.is_classical or (var.is_garbage and not disposing):
            raise KindMismatchError("'{}' cannot consume {}.".format(op, var))
    for var in produced:
        if var.is_classical or (var.is_garbage and not restoring):
            raise KindMismatchError("'{}' cannot produce {}.".format(op, var))
    for var in produced_classical:
        if not var.is_classical:
            raise KindMismatchError("'{}' cannot produce {} as classical.".format(op, var))


def effect_of(f: FunctionDef, program: Program | None = None) -> Effect:
    """Return the least effect consistent with every statement of ``f``.

    Recursive call graphs are handled by a fixpoint iteration starting from
    :attr:`~unfab.ir.Effect.PURE` for every function.

    Raises:
        :exc:`ValueError`:
            If a callee does not resolve.

    """
    program = program if program is not None else Program({f.name: f})
    effects: dict[str, Effect] = {}
    order = _reachable(f, program)
    for name in order:
        effects[name] = Effect.PURE
    changed = True
    while changed:
        changed = False
        for name in order:
            body = f.body if name == f.name else program[name].body
            new = max((_stmt_effect(s, effects) for s in body), default=Effect.PURE)
            if new > effects[name]:
                effects[name] = new
                changed = True
    return effects[f.name]


def _stmt_effect(stmt: Statement, effects: dict[str, Effect]) -> Effect:
    op = stmt.op
    if op.classical_only:
        return Effect.PURE
    if op.is_builtin:
        return BUILTINS[op.target].effect
    return effects[op.target]


def _reachable(f: FunctionDef, program: Program) -> list[str]:
    order = [f.name]
    seen = {f.name}
    stack = [f]
    while stack:
        current = stack.pop()
        for stmt in current.body:
            target = stmt.op.target
            if stmt.op.is_builtin or stmt.op.classical_only or target in seen:
                continue
            if target not in program:
                raise ValueError(
                    "Unresolved callee '{}' in function '{}'.".format(target, current.name)
                )
            seen.add(target)
            order.append(target)
            stack.append(program[target])
    return order


def structural_check(f: FunctionDef) -> list[Diagnostic]:
    """Check single definition, single consumption and conserved-use scoping of ``f``.

    A scope interpreter walks the body in order. Quantum and garbage variables enter scope
    when produced and leave it when consumed; classical variables stay defined once produced.
    Conserved parameters are in scope throughout and may never be consumed. At the end the
    scope must equal the returned variables. The garbage bin of a garbage-mode function is fed
    implicitly by ``dispose`` and is exempt.
    """
    diagnostics: list[Diagnostic] = []

    def report(code: str, message: str, index: int | None, var: Var | None) -> None:
        span = f.body[index].span if index is not None else f.span
        diagnostics.append(
            Diagnostic(
                code,
                message,
                function=f.name,
                statement=index,
                var=None if var is None else str(var),
                span=span,
            )
        )

    bin_ident = f.bin.ident if f.bin is not None else None
    conserved = {v.ident for v in f.conserved_params}
    classical = {v.name for v in f.classical_in}
    scope = {v.ident for v in f.consumed_params if v.ident != bin_ident}
    defined = set(scope) | conserved | {v.ident for v in f.classical_in}
    consumed_at: dict[tuple[VarKind, str], int] = {}

    for var in f.params:
        if var.is_classical and var not in f.classical_in:
            report("KindMismatch", "classical parameter {} out of place".format(var), None, var)

    def check_refs(names: Iterable[str], index: int) -> None:
        for name in sorted(names):
            if name not in classical:
                report(
                    "UndefinedClassical",
                    "classical variable ${} is not defined".format(name),
                    index,
                    Var(name, VarKind.CLASSICAL),
                )

    def check_read(var: Var, index: int) -> None:
        if var.is_classical:
            if var.name not in classical:
                report("UndefinedClassical", "{} is not defined".format(var), index, var)
        elif var.is_garbage:
            report("GarbageMisuse", "garbage {} cannot be used".format(var), index, var)
        elif var.ident not in scope and var.ident not in conserved:
            if var.ident in consumed_at:
                report(
                    "UseAfterConsume",
                    "{} is used after being consumed by statement {}".format(
                        var, consumed_at[var.ident]
                    ),
                    index,
                    var,
                )
            else:
                report("UseBeforeDefine", "{} is used before definition".format(var), index, var)

    for index, stmt in enumerate(f.body):
        check_refs(stmt.referenced_classical(), index)
        for var in stmt.used_vars():
            check_read(var, index)
        if stmt.condition and stmt.effect >= Effect.MEASURE:
            report("ControlledMeasure", "measuring statements cannot be controlled", index, None)
        if stmt.effect > f.declared_effect:
            report(
                "EffectTooWeak",
                "statement effect {} exceeds declared effect {}".format(
                    stmt.effect.symbol, f.declared_effect.symbol
                ),
                index,
                None,
            )
        seen_here: set[tuple[VarKind, str]] = set()
        for var in stmt.consumed:
            if var.is_classical:
                report("KindMismatch", "classical {} cannot be consumed".format(var), index, var)
            elif var.ident in seen_here:
                report("DoubleConsume", "{} is consumed twice".format(var), index, var)
            elif var.ident in conserved:
                report("ConsumeConserved", "conserved {} is consumed".format(var), index, var)
            elif var.ident in scope:
                scope.discard(var.ident)
                consumed_at[var.ident] = index
            elif var.ident in consumed_at:
                report("DoubleConsume", "{} is consumed twice".format(var), index, var)
            else:
                message = "{} is consumed before definition".format(var)
                report("UseBeforeDefine", message, index, var)
            seen_here.add(var.ident)
        for var in stmt.produced:
            if var.ident in defined:
                report("Redefinition", "{} is defined more than once".format(var), index, var)
            defined.add(var.ident)
            if var.is_classical:
                classical.add(var.name)
            else:
                scope.add(var.ident)

    for var in f.returned_classical:
        if var.name not in classical:
            report("ReturnNotInScope", "returned {} is not defined".format(var), None, var)
    returned = set()
    for var in f.returned_quantum:
        if var.ident == bin_ident:
            continue
        if var.ident not in scope:
            report("ReturnNotInScope", "returned {} is not in scope".format(var), None, var)
        if var.ident in returned:
            report("DoubleConsume", "{} is returned twice".format(var), None, var)
        returned.add(var.ident)
    for ident in sorted(scope - returned, key=lambda i: (i[1], i[0].value)):
        var = Var(ident[1], ident[0])
        report("NotConsumed", "{} is never consumed".format(var), None, var)
    return diagnostics


def check_program(program: Program) -> list[Diagnostic]:
    """Check that every call target resolves and operand counts and kinds match."""
    diagnostics: list[Diagnostic] = []
    functions = list(program.functions.values()) + list(program.derived.values())
    for f in functions:
        for index, stmt in enumerate(f.body):
            try:
                make_statement(
                    stmt.op,
                    stmt.conserved,
                    stmt.consumed,
                    stmt.produced_quantum,
                    stmt.condition,
                    produced_classical=stmt.produced_classical,
                    program=program,
                )
            except (KindMismatchError, ValueError) as e:
                code = "UnresolvedCallee" if "Unresolved" in str(e) else "KindMismatch"
                diagnostics.append(
                    Diagnostic(code, str(e), function=f.name, statement=index, span=stmt.span)
                )
    return diagnostics


class _Renaming:
    def __init__(self) -> None:
        self.forward: dict[tuple[VarKind, str], str] = {}
        self.backward: dict[tuple[VarKind, str], str] = {}

    def match(self, a: Var, b: Var) -> bool:
        if a.kind is not b.kind:
            return False
        known = self.forward.get(a.ident)
        if known is not None:
            if known != b.name:
                return False
        elif self.backward.get(b.ident, a.name) != a.name:
            return False
        self.forward[a.ident] = b.name
        self.backward[b.ident] = a.name
        return self.expr(a.width) == b.width

    def match_all(self, a: Sequence[Var], b: Sequence[Var]) -> bool:
        return len(a) == len(b) and all(self.match(x, y) for x, y in zip(a, b))

    def expr(self, expr: Expr | None) -> Expr | None:
        if expr is None:
            return None
        mapping: dict[str, Expr] = {
            name: Ref(self.forward.get((VarKind.CLASSICAL, name), name))
            for name in expr.free_vars()
        }
        return expr.substitute(mapping)

    def literal(self, literal: Literal) -> tuple[VarKind, str, bool] | None:
        name = self.forward.get(literal.var.ident)
        if name is None:
            return None
        return (literal.var.kind, name, literal.negated)


def alpha_equivalent(f: FunctionDef, g: FunctionDef) -> bool:
    """Whether ``f`` and ``g`` are equal up to a consistent renaming of variables.

    Function names, statement identities and pair tags are ignored.
    """
    if len(f.body) != len(g.body) or f.declared_effect is not g.declared_effect:
        return False
    renaming = _Renaming()
    if not (
        renaming.match_all(f.classical_in, g.classical_in)
        and renaming.match_all(f.conserved_params, g.conserved_params)
        and renaming.match_all(f.consumed_params, g.consumed_params)
    ):
        return False
    if (f.bin is None) != (g.bin is None):
        return False
    if f.bin is not None and g.bin is not None and not renaming.match(f.bin, g.bin):
        return False
    for a, b in zip(f.body, g.body):
        if a.op.target != b.op.target or a.op.modes != b.op.modes or a.effect is not b.effect:
            return False
        static_a = tuple(
            renaming.expr(x) if isinstance(x, Expr) else x for x in a.op.static_args
        )
        if static_a != b.op.static_args:
            return False
        if not (
            renaming.match_all(a.conserved, b.conserved)
            and renaming.match_all(a.consumed, b.consumed)
        ):
            return False
        mapped = {renaming.literal(lit) for lit in a.condition}
        if None in mapped:
            return False
        expected = {(lit.var.kind, lit.var.name, lit.negated) for lit in b.condition}
        if mapped != expected:
            return False
        if not (
            renaming.match_all(a.produced_classical, b.produced_classical)
            and renaming.match_all(a.produced_quantum, b.produced_quantum)
        ):
            return False
    return renaming.match_all(f.returned_classical, g.returned_classical) and renaming.match_all(
        f.returned_quantum, g.returned_quantum
    )
