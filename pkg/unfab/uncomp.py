from __future__ import annotations

from collections.abc import Iterable
import dataclasses

from optuna.logging import get_logger

from unfab.exceptions import SynthesisError
from unfab.ir import consumed_context
from unfab.ir import DefUse
from unfab.ir import Effect
from unfab.ir import fresh_name
from unfab.ir import FunctionDef
from unfab.ir import Mode
from unfab.ir import Operation
from unfab.ir import produced_context
from unfab.ir import Statement
from unfab.ir import Substitution
from unfab.ir import Var
from unfab.ir import VarKind


_logger = get_logger(__name__)

_Ident = tuple[VarKind, str]

_DUP = Operation("dup")
_UNDUP = Operation("dup", (Mode.ADJOINT,))


def _is_forget(stmt: Statement) -> bool:
    return stmt.op.is_("forget") and not stmt.op.modes


@dataclasses.dataclass
class SynthState:
    """Bookkeeping of the backward uncomputation pass.

    Args:
        function:
            The function being transformed.
        body:
            The statements in their current order; inserted statements get fresh ``sid``.
        returns:
            The returned quantum variables after substitutions.
        alive:
            Variables in scope right after the statement under the cursor.
        undone:
            ``sid`` of statements whose inverse has been inserted.
        extended:
            Variables consumed before the cursor that an inserted inverse consumes again later.
        pair_tags:
            ``(compute sid, uncompute sid)`` of every inserted inverse.

    """

    function: FunctionDef
    body: list[Statement]
    returns: list[Var]
    alive: set[_Ident]
    undone: set[int] = dataclasses.field(default_factory=set)
    extended: set[_Ident] = dataclasses.field(default_factory=set)
    pair_tags: list[tuple[int, int]] = dataclasses.field(default_factory=list)
    taken: set[str] = dataclasses.field(default_factory=set)
    tags: set[str] = dataclasses.field(default_factory=set)
    next_sid: int = 0

    @classmethod
    def start(cls, f: FunctionDef) -> SynthState:
        body = [dataclasses.replace(s, sid=i) for i, s in enumerate(f.body)]
        alive = {v.ident for v in f.conserved_params + f.returned_quantum}
        state = cls(f, body, list(f.returned_quantum), alive, next_sid=len(body))
        state.taken = {name for _, name in f.all_vars()}
        state.tags = {s.pair_tag for s in f.body if s.pair_tag is not None}
        return state

    def index(self, sid: int) -> int:
        for i, stmt in enumerate(self.body):
            if stmt.sid == sid:
                return i
        raise KeyError(sid)

    def statement(self, sid: int) -> Statement:
        return self.body[self.index(sid)]

    def _new(self, stmt: Statement) -> Statement:
        stmt = dataclasses.replace(stmt, sid=self.next_sid)
        self.next_sid += 1
        return stmt

    def insert_after(self, sid: int, stmt: Statement) -> Statement:
        stmt = self._new(stmt)
        self.body.insert(self.index(sid) + 1, stmt)
        return stmt

    def insert_before(self, sid: int, stmt: Statement) -> Statement:
        stmt = self._new(stmt)
        self.body.insert(self.index(sid), stmt)
        return stmt

    def remove(self, sid: int) -> None:
        del self.body[self.index(sid)]

    def replace(self, stmt: Statement) -> None:
        self.body[self.index(stmt.sid)] = stmt

    def producer(self, var: Var) -> Statement | None:
        for stmt in self.body:
            if any(v.ident == var.ident for v in stmt.produced):
                return stmt
        return None

    def fresh(self, var: Var) -> Var:
        return dataclasses.replace(var, name=fresh_name(var.name, self.taken))

    def fresh_tag(self) -> str:
        index = len(self.tags)
        while "u{}".format(index) in self.tags:
            index += 1
        tag = "u{}".format(index)
        self.tags.add(tag)
        return tag

    def substitute_after(self, sid: int, old: Var, new: Var) -> None:
        subst = Substitution({old: new})
        start = self.index(sid) + 1
        self.body[start:] = [subst.statement(s) for s in self.body[start:]]
        self.returns = [subst.var(v) for v in self.returns]

    def is_param(self, var: Var) -> bool:
        f = self.function
        return any(v.ident == var.ident for v in f.conserved_params + f.consumed_params)


def ensure_uncomputed(state: SynthState, s: int, x: Var) -> SynthState:
    """Make sure ``x`` is in scope at statement ``s`` and uncomputed after it.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``x`` is a parameter or its producer is not pure. Neither happens for
            well-forgotten input.

    """
    if state.is_param(x):
        raise SynthesisError(
            "Cannot uncompute parameter {} of '{}'.".format(x, state.function.name)
        )
    producer = state.producer(x)
    if producer is None:
        raise SynthesisError("{} has no producer in '{}'.".format(x, state.function.name))
    if producer.effect >= Effect.QUANTUM:
        raise SynthesisError(
            "Cannot uncompute {}: '{}' has effect {}.".format(
                x, producer.op, producer.effect.symbol
            )
        )
    if producer.sid not in state.undone:
        state.undone.add(producer.sid)
        undo_statement(state, s, producer.sid)
    return state


def undo_statement(state: SynthState, s: int, c: int) -> SynthState:
    """Insert the inverse of statement ``c`` right after statement ``s``.

    Inputs of ``c`` that are not alive are uncomputed later as well, outputs of ``c`` that are
    still alive are duplicated before the inverse and outputs consumed earlier have their
    lifetime extended.
    """
    compute = state.statement(c)
    for var in compute.conserved:
        if var.is_quantum and var.ident not in state.alive:
            ensure_uncomputed(state, s, var)
    for var in compute.consumed:
        if var.is_quantum:
            ensure_uncomputed(state, s, var)
    compute = state.statement(c)
    restored = [state.fresh(v) for v in compute.consumed]
    dups = []
    for var in compute.produced_quantum:
        if var.ident in state.alive:
            copy = state.fresh(var)
            state.substitute_after(s, var, copy)
            dups.append(
                Statement(
                    op=_DUP,
                    produced_quantum=(copy,),
                    conserved=(var,),
                    condition=produced_context(compute, var),
                )
            )
    tag = state.fresh_tag()
    uncompute = Statement(
        op=compute.op.inverse(),
        effect=Effect.PURE,
        produced_quantum=tuple(restored),
        conserved=compute.conserved,
        consumed=compute.produced_quantum,
        condition=compute.condition,
        pair_tag=tag,
    )
    state.replace(dataclasses.replace(compute, pair_tag=tag))
    uncompute = state.insert_after(s, uncompute)
    for var, copy in zip(compute.consumed, restored):
        state.insert_after(
            uncompute.sid,
            Statement(
                op=_UNDUP,
                conserved=(var,),
                consumed=(copy,),
                condition=consumed_context(compute, var),
            ),
        )
    for dup in dups:
        state.insert_before(uncompute.sid, dup)
    for var in compute.produced_quantum:
        if var.ident not in state.alive:
            state.extended.add(var.ident)
    state.pair_tags.append((c, uncompute.sid))
    return state


def synthesize_uncomputation(f: FunctionDef) -> FunctionDef:
    """Replace every ``forget`` of ``f`` with explicit uncomputation.

    A single backward pass undoes the producer of each forgotten variable right after the
    ``forget``, recursively undoing producers of its inputs. Compute statements and their
    inverses share a ``pair_tag``.

    Args:
        f:
            A well-forgotten function.

    Returns:
        A function without ``forget`` statements.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``f`` is not well-forgotten.

    """
    state = SynthState.start(f)
    for sid in [stmt.sid for stmt in reversed(state.body)]:
        stmt = state.statement(sid)
        if _is_forget(stmt):
            for var in stmt.consumed:
                ensure_uncomputed(state, sid, var)
            state.remove(sid)
            continue
        for var in stmt.consumed:
            if var.ident in state.extended:
                copy = state.fresh(var)
                state.insert_before(
                    sid,
                    Statement(
                        op=_DUP,
                        produced_quantum=(copy,),
                        conserved=(var,),
                        condition=consumed_context(stmt, var),
                    ),
                )
                stmt = dataclasses.replace(
                    stmt,
                    consumed=tuple(copy if v == var else v for v in stmt.consumed),
                )
                state.replace(stmt)
        original = f.body[sid]
        for var in original.produced:
            state.alive.discard(var.ident)
        for var in original.consumed:
            state.alive.add(var.ident)
    _logger.debug(
        "Synthesized uncomputation of {}: {} inverse statements.".format(
            f.key, len(state.pair_tags)
        )
    )
    result = f.with_body(state.body)
    return dataclasses.replace(result, returned_quantum=tuple(state.returns))


def _is_dup(stmt: Statement) -> bool:
    return stmt.op.is_("dup") and stmt.op.modes in ((), (Mode.GARBAGE,))


def _is_undup(stmt: Statement) -> bool:
    return stmt.op.is_("dup") and stmt.op.modes in (
        (Mode.ADJOINT,),
        (Mode.ADJOINT, Mode.GARBAGE),
    )


def _root(var: Var, body: list[Statement], defuse: DefUse) -> Var:
    seen = set()
    while var.ident not in seen:
        seen.add(var.ident)
        index = defuse.producer(var)
        if index is None or not _is_dup(body[index]):
            break
        var = body[index].conserved[0]
    return var


def _disposal(body: list[Statement], defuse: DefUse, stmt: Statement) -> int | None:
    """Index of the ``dispose`` of the garbage ``stmt`` produces; -1 when there is none."""
    garbage = [v for v in stmt.produced_quantum if v.is_garbage]
    if not garbage:
        return -1
    index = defuse.consumer(garbage[0])
    if index is None:
        return None
    disposer = body[index]
    if disposer.op != Operation("dispose") or disposer.condition != stmt.condition:
        return None
    return index


def _new_root(root: Var, body: list[Statement], defuse: DefUse) -> int | None:
    index = defuse.producer(root)
    if index is None:
        return None
    stmt = body[index]
    if stmt.op.is_("new") and not stmt.op.modes:
        return int(stmt.op.static_args[0])
    return None


def _cancel_once(f: FunctionDef) -> FunctionDef | None:
    body = list(f.body)
    defuse = DefUse(f)
    for i, dup in enumerate(body):
        if not _is_dup(dup):
            continue
        copy = dup.produced_quantum[0]
        j = defuse.consumer(copy)
        if j is None or not _is_undup(body[j]):
            continue
        undup = body[j]
        source = dup.conserved[0]
        if undup.condition != dup.condition:
            continue
        if _root(source, body, defuse) != _root(undup.conserved[0], body, defuse):
            continue
        uses = defuse.uses(copy)
        source_end = defuse.consumer(source)
        if uses and source_end is not None and source_end < max(uses):
            continue
        disposals = [_disposal(body, defuse, dup), _disposal(body, defuse, undup)]
        if None in disposals:
            continue
        dropped = {i, j} | {k for k in disposals if k is not None and k >= 0}
        subst = Substitution({copy: source})
        body = [subst.statement(s) for k, s in enumerate(body) if k not in dropped]
        return subst.function(f.with_body(body))
    return None


def _allocate_from_root(f: FunctionDef) -> FunctionDef | None:
    # Copies of a freshly allocated qubit are themselves fresh allocations.
    body = list(f.body)
    defuse = DefUse(f)
    for i, stmt in enumerate(body):
        if _is_dup(stmt) or _is_undup(stmt):
            value = _new_root(_root(stmt.conserved[0], body, defuse), body, defuse)
            if value is None:
                continue
            modes = tuple(m for m in stmt.op.modes if m is not Mode.GARBAGE)
            op = Operation("new", modes, (value,))
            if stmt.op.garbage:
                op = op.with_mode(Mode.GARBAGE)
            body[i] = dataclasses.replace(stmt, op=op, conserved=())
            return f.with_body(body)
    return None


def cancel_dup_pairs(f: FunctionDef) -> FunctionDef:
    """Remove redundant copies.

    A copy ``t := dup[a]`` whose only consumer is ``undup[b](t)`` with ``a`` and ``b`` copies of
    the same value, under the same clause, is dropped together with its consumer and the
    remaining conserved uses of ``t`` read ``a`` instead. Garbage-mode copies are dropped with
    the ``dispose`` of their empty garbage. Copies of a freshly allocated qubit become
    allocations. Runs to a fixpoint.
    """
    before = len(f.body)
    while True:
        changed = _cancel_once(f)
        if changed is None:
            changed = _allocate_from_root(f)
        if changed is None:
            break
        f = changed
    _logger.debug(
        "Cancelled dup pairs of {}: {} -> {} statements.".format(f.key, before, len(f.body))
    )
    return f


def forget_count(f: FunctionDef) -> int:
    return sum(1 for stmt in f.body if _is_forget(stmt))


def inverse_pairs(f: FunctionDef) -> Iterable[tuple[int, int]]:
    """Yield ``(compute, uncompute)`` statement indices linked by a pair tag."""
    first: dict[str, int] = {}
    for index, stmt in enumerate(f.body):
        if stmt.pair_tag is None:
            continue
        if stmt.pair_tag in first:
            yield first.pop(stmt.pair_tag), index
        else:
            first[stmt.pair_tag] = index
