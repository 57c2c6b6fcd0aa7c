from __future__ import annotations

import dataclasses

from optuna.logging import get_logger

from unfab.ir import Const
from unfab.ir import cvar
from unfab.ir import DefUse
from unfab.ir import Effect
from unfab.ir import Expr
from unfab.ir import FunctionDef
from unfab.ir import Literal
from unfab.ir import merges
from unfab.ir import Mode
from unfab.ir import splits
from unfab.ir import Statement
from unfab.ir import Substitution
from unfab.ir import Var
from unfab.uncomp import cancel_dup_pairs


_logger = get_logger(__name__)

MAX_SIMPLIFY_ROUNDS = 20


def _is_calc(stmt: Statement) -> bool:
    return stmt.op.is_("calc") and not stmt.op.modes


def _is_classical(stmt: Statement) -> bool:
    return _is_calc(stmt) or stmt.op.classical_only


def _fold_calc(stmt: Statement, env: dict[str, int]) -> Statement:
    expr = stmt.op.static_args[0].fold(env)
    refs = tuple(cvar(name) for name in sorted(expr.free_vars()))
    return dataclasses.replace(
        stmt, op=dataclasses.replace(stmt.op, static_args=(expr,)), conserved=refs
    )


def _resolve_condition(
    condition: tuple[Literal, ...], env: dict[str, int]
) -> tuple[Literal, ...] | None:
    # None when a literal is known to be false.
    kept = []
    for literal in condition:
        if literal.var.is_classical and literal.var.name in env:
            if bool(env[literal.var.name]) == literal.negated:
                return None
            continue
        kept.append(literal)
    return tuple(kept)


def _constant_control(stmt: Statement, env: dict[str, int]) -> bool | None:
    control = stmt.conserved[0]
    if control.is_classical and control.name in env:
        return bool(env[control.name])
    return None


def constant_propagate(f: FunctionDef) -> FunctionDef:
    """Fold classical expressions and resolve conditions on constant classical values.

    ``calc`` statements whose operands are known fold to constants. A statement whose clause
    holds a literal known to be false is deleted; known-true literals are dropped from clauses.
    ``distribute`` and ``select`` on a known control are replaced by renaming the live branch.
    """
    env: dict[str, int] = {}
    renames: dict[Var, Var] = {}
    body: list[Statement] = []
    for stmt in f.body:
        stmt = Substitution(renames).statement(stmt) if renames else stmt
        subst = Substitution(constants=env)
        stmt = stmt.map_vars(subst.var, lambda e: subst.expr(e).fold())
        condition = _resolve_condition(stmt.condition, env)
        if condition is None:
            continue
        stmt = stmt.with_condition(condition)
        if _is_calc(stmt):
            stmt = _fold_calc(stmt, env)
            expr: Expr = stmt.op.static_args[0]
            if isinstance(expr, Const):
                env[stmt.produced_classical[0].name] = int(expr.value)
        elif not stmt.op.modes and (splits(stmt.op) or merges(stmt.op)):
            control = _constant_control(stmt, env)
            if control is not None:
                slot = 1 if control else 0
                if splits(stmt.op):
                    renames[stmt.produced_quantum[slot]] = stmt.consumed[0]
                else:
                    renames[stmt.produced_quantum[0]] = stmt.consumed[slot]
                continue
        body.append(stmt)
    result = f.with_body(body)
    if renames:
        subst = Substitution(renames)
        result = dataclasses.replace(
            result,
            returned_quantum=tuple(subst.var(v) for v in result.returned_quantum),
        )
    return result


def _cse_key(stmt: Statement) -> tuple[object, ...]:
    return (stmt.op, stmt.conserved, stmt.condition, len(stmt.produced_classical))


def common_subexpr_eliminate(f: FunctionDef) -> FunctionDef:
    """Merge classical statements computing the same value under the same clause.

    Quantum statements are never merged: every quantum result is consumed exactly once.
    """
    seen: dict[tuple[object, ...], Statement] = {}
    renames: dict[Var, Var] = {}
    body = []
    for stmt in f.body:
        stmt = Substitution(renames).statement(stmt) if renames else stmt
        if _is_classical(stmt) and stmt.effect is Effect.PURE:
            key = _cse_key(stmt)
            first = seen.get(key)
            if first is not None:
                renames.update(zip(stmt.produced_classical, first.produced_classical))
                continue
            seen[key] = stmt
        body.append(stmt)
    if not renames:
        return f
    subst = Substitution(renames)
    return dataclasses.replace(
        f.with_body(body),
        returned_classical=tuple(subst.var(v) for v in f.returned_classical),
    )


def _classical_uses(f: FunctionDef) -> set[str]:
    names = {v.name for v in f.returned_classical}
    for var in f.params + f.returns:
        if var.width is not None:
            names |= var.width.free_vars()
    for stmt in f.body:
        names |= stmt.referenced_classical()
        names |= {v.name for v in stmt.used_vars() if v.is_classical}
    return names


def _is_allocation(stmt: Statement) -> bool:
    return stmt.op.is_("new") and not stmt.op.modes


def _is_deallocation(stmt: Statement, value: object) -> bool:
    return (
        stmt.op.is_("new")
        and stmt.op.modes == (Mode.ADJOINT,)
        and stmt.op.static_args[:1] == (value,)
    )


def _removable_pair(f: FunctionDef, defuse: DefUse, index: int) -> int | None:
    stmt = f.body[index]
    if _is_allocation(stmt):
        var = stmt.produced_quantum[0]
        j = defuse.consumer(var)
        if j is None or not _is_deallocation(f.body[j], stmt.op.static_args[0]):
            return None
    elif stmt.op.is_("dup") and not stmt.op.modes:
        var = stmt.produced_quantum[0]
        j = defuse.consumer(var)
        if j is None or f.body[j].op != stmt.op.inverse():
            return None
        if f.body[j].conserved != stmt.conserved:
            return None
    else:
        return None
    if f.body[j].condition != stmt.condition or defuse.uses(var):
        return None
    return j


def dead_code_eliminate(f: FunctionDef) -> FunctionDef:
    """Delete pure statements whose results are never used, to a fixpoint.

    Only classical results and statements without quantum results can be dead: every quantum
    variable is consumed exactly once. An allocation consumed directly by its deallocation and
    a copy consumed directly by its uncopy are deleted together.
    """
    while True:
        used = _classical_uses(f)
        defuse = DefUse(f)
        dropped: set[int] = set()
        for index, stmt in enumerate(f.body):
            if stmt.effect is not Effect.PURE or index in dropped:
                continue
            if stmt.produced_quantum or stmt.consumed:
                partner = _removable_pair(f, defuse, index)
                if partner is not None and partner not in dropped:
                    dropped |= {index, partner}
                continue
            if stmt.op.is_("forget"):
                continue
            if all(v.name not in used for v in stmt.produced_classical):
                dropped.add(index)
        if not dropped:
            return f
        f = f.with_body(s for i, s in enumerate(f.body) if i not in dropped)


def simplify(f: FunctionDef) -> FunctionDef:
    """Run constant propagation, CSE, dead code elimination and copy cancellation to a fixpoint.

    At most :data:`MAX_SIMPLIFY_ROUNDS` rounds are run; a warning is logged when the result
    still changes after the last one.
    """
    before = len(f.body)
    for _ in range(MAX_SIMPLIFY_ROUNDS):
        g = cancel_dup_pairs(
            dead_code_eliminate(common_subexpr_eliminate(constant_propagate(f)))
        )
        if g == f:
            break
        f = g
    else:
        _logger.warning(
            "Simplification of {} did not converge in {} rounds.".format(
                f.key, MAX_SIMPLIFY_ROUNDS
            )
        )
    _logger.debug("Simplified {}: {} -> {} statements.".format(f.key, before, len(f.body)))
    return f
