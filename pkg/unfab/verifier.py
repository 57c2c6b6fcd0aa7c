from __future__ import annotations

from collections.abc import Iterable
import dataclasses

from optuna.logging import get_logger

from unfab.exceptions import VerificationError
from unfab.ir import check_program
from unfab.ir import consumed_context
from unfab.ir import DefUse
from unfab.ir import Diagnostic
from unfab.ir import Effect
from unfab.ir import FunctionDef
from unfab.ir import Literal
from unfab.ir import Mode
from unfab.ir import op_effect
from unfab.ir import Program
from unfab.ir import Statement
from unfab.ir import structural_check
from unfab.ir import Var
from unfab.ir import VarKind


_logger = get_logger(__name__)

_Ident = tuple[VarKind, str]


@dataclasses.dataclass(frozen=True)
class ForgettableWitness:
    """Evidence that a variable can be recomputed at a program point.

    Args:
        var:
            The forgettable variable.
        producer:
            Index of the statement producing ``var``.
        dependencies:
            Quantum operands of the producer.
        chain:
            ``(variable, producer index)`` pairs of every variable that had to be recomputed,
            starting with ``var`` itself.

    """

    var: Var
    producer: int
    dependencies: tuple[Var, ...]
    chain: tuple[tuple[Var, int], ...]


@dataclasses.dataclass(frozen=True)
class ForgetFailure:
    """Reason why a variable is not forgettable.

    ``code`` is ``QuantumProducer``, ``NoProducer``, ``ConditionNotImplied`` or
    ``DependencyUnavailable``; in the last case ``cause`` holds the failure of the dependency.
    """

    var: Var
    code: str
    message: str
    statement: int | None = None
    cause: ForgetFailure | None = None

    def __bool__(self) -> bool:
        return False

    def root(self) -> ForgetFailure:
        failure = self
        while failure.cause is not None:
            failure = failure.cause
        return failure


def _implies(clause: Iterable[Literal], premise: Iterable[Literal]) -> bool:
    # ``premise`` implies ``clause`` syntactically when it contains every literal of it.
    return set(clause) <= set(premise)


def _report(
    f: FunctionDef, code: str, message: str, index: int | None, var: Var | None = None
) -> Diagnostic:
    span = f.body[index].span if index is not None else f.span
    return Diagnostic(
        code,
        message,
        function=f.name,
        statement=index,
        var=None if var is None else str(var),
        span=span,
    )


def _clause(literals: Iterable[Literal]) -> str:
    text = " && ".join(str(lit) for lit in literals)
    return text or "true"


def check_conditions(f: FunctionDef) -> list[Diagnostic]:
    """Check that every statement is condition-valid.

    Consumed and produced variables must be defined under exactly the clause the statement
    expects, where ``distribute`` and ``select`` absorb their control literal into the branch
    copies. Conserved arguments and condition literals must be defined under a clause implied
    by the statement's clause. Returned variables must be unconditionally defined.
    """
    diagnostics = []
    defuse = DefUse(f)
    for index, stmt in enumerate(f.body):
        for var in stmt.consumed:
            if defuse.producer(var) is None and not defuse.is_param(var):
                continue
            expected = consumed_context(stmt, var)
            actual = defuse.context(var)
            if actual != expected:
                diagnostics.append(
                    _report(
                        f,
                        "ConditionMismatch",
                        "{} is defined under '{}' but consumed under '{}'".format(
                            var, _clause(actual), _clause(expected)
                        ),
                        index,
                        var,
                    )
                )
        for var in stmt.used_vars():
            if defuse.producer(var) is None:
                continue
            context = defuse.context(var)
            if not _implies(context, stmt.condition):
                diagnostics.append(
                    _report(
                        f,
                        "ConditionNotImplied",
                        "{} is defined under '{}', which '{}' does not imply".format(
                            var, _clause(context), _clause(stmt.condition)
                        ),
                        index,
                        var,
                    )
                )
    for var in f.returns:
        if var == f.bin or defuse.producer(var) is None:
            continue
        context = defuse.context(var)
        if context:
            diagnostics.append(
                _report(
                    f,
                    "ConditionMismatch",
                    "returned {} is only defined under '{}'".format(var, _clause(context)),
                    None,
                    var,
                )
            )
    return diagnostics


def check_effects(f: FunctionDef, program: Program | None = None) -> list[Diagnostic]:
    """Validate statement effect annotations against the operations they call.

    Built-in effects come from the built-in table and calls to user functions from
    :func:`~unfab.ir.effect_of`. An annotation weaker than the callee's effect is reported;
    a stronger one is a harmless over-approximation.
    """
    diagnostics = []
    for index, stmt in enumerate(f.body):
        try:
            actual = op_effect(stmt.op, program)
        except ValueError as e:
            diagnostics.append(_report(f, "UnresolvedCallee", str(e), index))
            continue
        if stmt.effect < actual:
            diagnostics.append(
                _report(
                    f,
                    "EffectMismatch",
                    "'{}' has effect {} but is annotated {}".format(
                        stmt.op, actual.symbol, stmt.effect.symbol
                    ),
                    index,
                )
            )
        if stmt.op.garbage and actual >= Effect.MEASURE:
            message = "measuring '{}' has no garbage mode".format(stmt.op)
            diagnostics.append(_report(f, "EffectMismatch", message, index))
    return diagnostics


def _is_inverse(compute: Statement, uncompute: Statement) -> bool:
    if uncompute.op == compute.op.inverse():
        return True
    # Connected pairs: op^G brackets op^G^adj.
    return compute.op.produces_garbage and uncompute.op == compute.op.with_mode(Mode.ADJOINT)


def check_bracketing(f: FunctionDef) -> list[Diagnostic]:
    """Check every pair tag links a compute statement to a later inverse under one clause."""
    diagnostics = []
    tagged: dict[str, list[int]] = {}
    for index, stmt in enumerate(f.body):
        if stmt.pair_tag is not None:
            tagged.setdefault(stmt.pair_tag, []).append(index)
    for tag, indices in tagged.items():
        if len(indices) != 2:
            diagnostics.append(
                _report(
                    f,
                    "UnpairedTag",
                    "pair tag @{} is used by {} statements".format(tag, len(indices)),
                    indices[0],
                )
            )
            continue
        compute, uncompute = (f.body[i] for i in indices)
        if not _is_inverse(compute, uncompute):
            diagnostics.append(
                _report(
                    f,
                    "BracketMismatch",
                    "'{}' does not undo '{}' (@{})".format(uncompute.op, compute.op, tag),
                    indices[1],
                )
            )
        if compute.condition != uncompute.condition:
            diagnostics.append(
                _report(
                    f,
                    "BracketCondition",
                    "@{} is computed under '{}' and uncomputed under '{}'".format(
                        tag, _clause(compute.condition), _clause(uncompute.condition)
                    ),
                    indices[1],
                )
            )
    return diagnostics


def _scope_before(f: FunctionDef, point: int) -> set[_Ident]:
    scope = {v.ident for v in f.conserved_params + f.consumed_params}
    for stmt in f.body[:point]:
        for var in stmt.consumed:
            scope.discard(var.ident)
        for var in stmt.produced_quantum:
            scope.add(var.ident)
    return scope


class _ForgetQuery:
    def __init__(self, f: FunctionDef, point: int, scope: set[_Ident]) -> None:
        self._f = f
        self._point = point
        self._scope = scope
        self._defuse = DefUse(f)
        self._memo: dict[_Ident, ForgettableWitness | ForgetFailure] = {}

    def witness(
        self, var: Var, required: tuple[Literal, ...]
    ) -> ForgettableWitness | ForgetFailure:
        known = self._memo.get(var.ident)
        if known is None:
            known = self._compute(var, required)
            self._memo[var.ident] = known
        return known

    def _compute(
        self, var: Var, required: tuple[Literal, ...]
    ) -> ForgettableWitness | ForgetFailure:
        index = self._defuse.producer(var)
        if index is None or index >= self._point:
            what = "parameter" if self._defuse.is_param(var) else "variable"
            return ForgetFailure(
                var,
                "NoProducer",
                "{} is a {} without a producing statement before the forget".format(var, what),
            )
        stmt = self._f.body[index]
        if stmt.effect >= Effect.QUANTUM:
            return ForgetFailure(
                var,
                "QuantumProducer",
                "producer '{}' of {} has effect {}".format(stmt.op, var, stmt.effect.symbol),
                index,
            )
        if not _implies(stmt.condition, required):
            return ForgetFailure(
                var,
                "ConditionNotImplied",
                "producer of {} runs under '{}', which '{}' does not imply".format(
                    var, _clause(stmt.condition), _clause(required)
                ),
                index,
            )
        deps = [v for v in stmt.conserved if v.is_quantum] + [
            v for v in stmt.consumed if v.is_quantum
        ]
        chain: list[tuple[Var, int]] = [(var, index)]
        for dep in deps:
            if dep.ident in self._scope:
                continue
            clause = consumed_context(stmt, dep) if dep in stmt.consumed else stmt.condition
            sub = self.witness(dep, clause)
            if isinstance(sub, ForgetFailure):
                return ForgetFailure(
                    var,
                    "DependencyUnavailable",
                    "{} depends on {}, which is neither in scope nor forgettable".format(var, dep),
                    index,
                    sub,
                )
            chain.extend(c for c in sub.chain if c not in chain)
        return ForgettableWitness(var, index, tuple(deps), tuple(chain))


def forgettable_at(
    f: FunctionDef,
    x: Var,
    point: int,
    *,
    scope: Iterable[Var] | None = None,
) -> ForgettableWitness | ForgetFailure:
    """Decide whether ``x`` can be recomputed in the basis at statement ``point``.

    ``x`` is forgettable when a pure statement before ``point`` produces it under a clause
    implied by the clause of the statement at ``point``, and every quantum operand of that
    statement is either in scope at ``point`` or itself forgettable.

    Args:
        f:
            The function.
        x:
            A quantum variable of ``f``.
        point:
            Index of the statement, usually a ``forget``, at which ``x`` is forgotten.
        scope:
            Variables to treat as in scope instead of the scope computed at ``point``.

    Returns:
        A :class:`ForgettableWitness`, or a :class:`ForgetFailure` describing the first
        violated condition. Failures are falsy.

    """
    if scope is None:
        in_scope = _scope_before(f, point)
    else:
        in_scope = {v.ident for v in scope}
    clause = f.body[point].condition if point < len(f.body) else ()
    return _ForgetQuery(f, point, in_scope).witness(x, clause)


def check_well_forgotten(f: FunctionDef) -> list[Diagnostic]:
    """Report every ``forget`` argument that is not forgettable at its statement."""
    diagnostics = []
    for index, stmt in enumerate(f.body):
        if not (stmt.op.is_("forget") and not stmt.op.modes):
            continue
        for var in stmt.consumed:
            result = forgettable_at(f, var, index)
            if isinstance(result, ForgetFailure):
                root = result.root()
                message = "{} cannot be forgotten: {}".format(var, root.message)
                diagnostics.append(
                    Diagnostic(
                        "NotForgettable",
                        message,
                        function=f.name,
                        statement=index,
                        var=str(var),
                        span=stmt.span,
                    )
                )
    return diagnostics


def verify_function(f: FunctionDef, program: Program | None = None) -> list[Diagnostic]:
    """Run every per-function check, stopping after the first stage that reports problems.

    Later stages assume the earlier ones pass: structure, then conditions and effects, then
    bracketing and well-forgottenness.
    """
    diagnostics = structural_check(f)
    if diagnostics:
        return diagnostics
    diagnostics = check_conditions(f) + check_effects(f, program)
    if diagnostics:
        return diagnostics
    diagnostics = check_bracketing(f) + check_well_forgotten(f)
    _logger.debug("Verified {} with {} diagnostics.".format(f.key, len(diagnostics)))
    return diagnostics


def verify_program(program: Program) -> list[Diagnostic]:
    diagnostics = check_program(program)
    if diagnostics:
        return diagnostics
    for f in list(program.functions.values()) + list(program.derived.values()):
        diagnostics.extend(verify_function(f, program))
    return diagnostics


def ensure_valid(f: FunctionDef, program: Program | None = None) -> None:
    """Raise :exc:`~unfab.exceptions.VerificationError` unless ``f`` passes every check."""
    diagnostics = verify_function(f, program)
    if diagnostics:
        raise VerificationError(diagnostics)
