from __future__ import annotations

import dataclasses

from optuna.logging import get_logger

from unfab.exceptions import SynthesisError
from unfab.ir import BinOp
from unfab.ir import Const
from unfab.ir import consumed_context
from unfab.ir import Effect
from unfab.ir import effect_of
from unfab.ir import Expr
from unfab.ir import FunctionDef
from unfab.ir import gvar
from unfab.ir import Literal
from unfab.ir import Mode
from unfab.ir import Operation
from unfab.ir import Program
from unfab.ir import Ref
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir import VarKind
from unfab.uncomp import forget_count
from unfab.uncomp import inverse_pairs


_logger = get_logger(__name__)

_DISPOSE = Operation("dispose")
_DUP = Operation("dup")


class _GarbageNames:
    def __init__(self, f: FunctionDef) -> None:
        self._taken = {name for _, name in f.all_vars()}
        self._next = 0

    def fresh(self, base: str = "g") -> Var:
        while "{}{}".format(base, self._next) in self._taken:
            self._next += 1
        name = "{}{}".format(base, self._next)
        self._taken.add(name)
        return gvar(name)

    def bin(self) -> Var:
        name = "bin"
        while name in self._taken:
            name += "'"
        self._taken.add(name)
        return gvar(name)


def _dispose(var: Var, condition: tuple[Literal, ...] = ()) -> Statement:
    return Statement(op=_DISPOSE, consumed=(var,), condition=condition)


def _connect(body: list[Statement], c: int, u: int, names: _GarbageNames) -> None:
    compute, uncompute = body[c], body[u]
    op = compute.op
    if op.garbage:
        raise SynthesisError("'{}' is already connected to garbage.".format(op))
    if uncompute.op != op.inverse():
        raise SynthesisError("'{}' is not the adjoint of '{}'.".format(uncompute.op, op))
    g = names.fresh()
    garbage_op = op.with_mode(Mode.GARBAGE)
    body[c] = dataclasses.replace(
        compute, op=garbage_op, produced_quantum=compute.produced_quantum + (g,)
    )
    body[u] = dataclasses.replace(
        uncompute,
        op=garbage_op.with_mode(Mode.ADJOINT),
        consumed=uncompute.consumed + (g,),
    )


def connect_garbage(f: FunctionDef, c: int, u: int) -> FunctionDef:
    """Link the compute statement ``c`` and its inverse ``u`` through a fresh garbage variable.

    ``c`` becomes ``op^G`` producing the garbage and ``u`` becomes ``op^G^adj`` consuming it.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``u`` does not call the adjoint of ``c`` or the pair is connected already.

    """
    body = list(f.body)
    _connect(body, c, u, _GarbageNames(f))
    return f.with_body(body)


def connect_pairs(f: FunctionDef) -> FunctionDef:
    """Connect every compute/uncompute pair recorded by uncomputation synthesis."""
    body = list(f.body)
    names = _GarbageNames(f)
    count = 0
    for c, u in inverse_pairs(f):
        if body[c].op.garbage:
            continue
        _connect(body, c, u, names)
        count += 1
    _logger.debug("Connected {} garbage pairs in {}.".format(count, f.key))
    return f.with_body(body)


def _can_carry_garbage(stmt: Statement) -> bool:
    if stmt.op.classical_only or stmt.op.is_("calc"):
        return False
    if stmt.op.is_("dispose") or stmt.op.consumes_garbage:
        return False
    return stmt.effect < Effect.MEASURE


def _propagate(body: list[Statement], s: int, names: _GarbageNames) -> int:
    stmt = body[s]
    if stmt.op.produces_garbage or not _can_carry_garbage(stmt):
        return 0
    g = names.fresh()
    body[s] = dataclasses.replace(
        stmt,
        op=stmt.op.with_mode(Mode.GARBAGE),
        produced_quantum=stmt.produced_quantum + (g,),
    )
    body.insert(s + 1, _dispose(g, stmt.condition))
    return 1


def propagate_garbage(f: FunctionDef, s: int) -> FunctionDef:
    """Switch statement ``s`` to garbage mode and dispose of its garbage right after it.

    Statements that already produce garbage, classical statements and ``dispose`` are left
    unchanged.
    """
    body = list(f.body)
    _propagate(body, s, _GarbageNames(f))
    return f.with_body(body)


def _condition_factor(condition: tuple[Literal, ...]) -> Expr:
    # A quantum control does not stop a disposal; a false classical literal does.
    factor: Expr = Const(1)
    for lit in condition:
        if lit.var.is_classical:
            ref: Expr = Ref(lit.var.name)
            factor = BinOp("*", factor, BinOp("-", Const(1), ref) if lit.negated else ref)
    return factor


def _call_bin_width(stmt: Statement, program: Program | None) -> Expr | None:
    callee = program.lookup(stmt.op.key) if program is not None else None
    if callee is None or callee.bin_width is None:
        return None
    args = {
        param.name: Ref(arg.name) if arg.is_classical else Const(0)
        for param, arg in zip(callee.classical_in, stmt.conserved)
    }
    return callee.bin_width.substitute(args)


def bin_width(f: FunctionDef, program: Program | None = None) -> Expr | None:
    """Return the number of qubits the ``dispose`` statements of ``f`` put into its bin.

    Built-in garbage is empty. The garbage of a call is the bin of the callee, looked up among
    the functions already derived in ``program``; :obj:`None` is returned when one is missing,
    as for recursive calls. Values computed by ``calc`` are inlined, so the result only refers
    to classical parameters and classical results of calls.
    """
    declared = {var.ident: var for var in f.params}
    producers: dict[tuple[VarKind, str], Statement] = {}
    calcs: dict[str, Expr] = {}
    total: Expr = Const(0)
    for stmt in f.body:
        for var in stmt.produced_quantum:
            declared.setdefault(var.ident, var)
            producers[var.ident] = stmt
        if stmt.op.is_("calc"):
            calcs[stmt.produced_classical[0].name] = stmt.op.static_args[0].substitute(calcs)
        if not stmt.op.is_("dispose") or not stmt.consumed:
            continue
        (var,) = stmt.consumed
        producer = producers.get(var.ident)
        if var.is_quantum:
            width: Expr | None = declared.get(var.ident, var).width or var.width or Const(1)
        elif producer is not None and not producer.op.is_builtin:
            width = _call_bin_width(producer, program)
        else:
            width = Const(0)
        if width is None:
            return None
        term = BinOp("*", width, _condition_factor(stmt.condition)).substitute(calcs)
        total = BinOp("+", total, term)
    return total.fold()


def erase_uncomputation(f: FunctionDef, program: Program | None = None) -> FunctionDef:
    """Build the garbage variant ``f^G`` of a pure function.

    Every statement consuming garbage is an uncomputation and is removed: its results are
    re-derived by copying the inputs of its compute partner, its remaining inputs are disposed
    and the partner's garbage goes to the bin. All other statements switch to garbage mode and
    dispose of their garbage immediately. The bin is returned last.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``f`` is not pure, or an uncomputation does not restore as many variables as
            its partner consumes, or ``f`` still contains ``forget``.

    """
    effect = effect_of(f, program) if program is not None else f.declared_effect
    if effect >= Effect.QUANTUM:
        raise SynthesisError(
            "Cannot erase uncomputation of '{}' with effect {}.".format(f.key, effect.symbol)
        )
    if forget_count(f):
        raise SynthesisError(
            "Cannot erase uncomputation of '{}': it still forgets.".format(f.key)
        )
    names = _GarbageNames(f)
    body = [dataclasses.replace(s, pair_tag=None) for s in f.body]
    i = 0
    erased = 0
    while i < len(body):
        stmt = body[i]
        if stmt.op.produces_garbage:
            g = [v for v in stmt.produced_quantum if v.is_garbage][-1]
            j = next(
                (k for k in range(i + 1, len(body)) if g in body[k].consumed),
                None,
            )
            if j is None or not body[j].op.consumes_garbage:
                i += 1
                continue
            uncompute = body[j]
            restored = [v for v in uncompute.produced_quantum if not v.is_garbage]
            inputs = [v for v in stmt.consumed if not v.is_garbage]
            if len(restored) != len(inputs):
                raise SynthesisError(
                    "'{}' restores {} variables but '{}' consumes {}.".format(
                        uncompute.op, len(restored), stmt.op, len(inputs)
                    )
                )
            disposals = [
                _dispose(v, consumed_context(uncompute, v))
                for v in uncompute.consumed
                if not v.is_garbage
            ]
            body[j : j + 1] = disposals
            body.insert(i + 1, _dispose(g, stmt.condition))
            copies = [
                Statement(
                    op=_DUP,
                    produced_quantum=(x,),
                    conserved=(source,),
                    condition=consumed_context(stmt, source),
                )
                for x, source in zip(restored, inputs)
            ]
            body[i:i] = copies
            i += len(copies) + 2
            erased += 1
        elif not stmt.op.is_("dispose"):
            i += 1 + _propagate(body, i, names)
        else:
            i += 1
    bin_ = names.bin()
    _logger.debug("Erased {} uncomputations of {}.".format(erased, f.key))
    g = dataclasses.replace(
        f,
        body=tuple(body),
        returned_quantum=f.returned_quantum + (bin_,),
        modes=f.modes + (Mode.GARBAGE,),
        declared_effect=Effect.PURE,
        bin=bin_,
    )
    return dataclasses.replace(g, bin_width=bin_width(g, program))
