from __future__ import annotations

import dataclasses

from optuna.logging import get_logger

from unfab.exceptions import SynthesisError
from unfab.ir import Effect
from unfab.ir import effect_of
from unfab.ir import fresh_name
from unfab.ir import FunctionDef
from unfab.ir import Mode
from unfab.ir import Program
from unfab.ir import Statement
from unfab.ir import Substitution
from unfab.ir import Var
from unfab.uncomp import forget_count


_logger = get_logger(__name__)


def _check_measure_free(f: FunctionDef, program: Program | None, what: str) -> None:
    effect = effect_of(f, program) if program is not None else f.declared_effect
    if effect >= Effect.MEASURE:
        raise SynthesisError("Cannot synthesize the {} of measuring '{}'.".format(what, f.key))


def _is_classical(stmt: Statement) -> bool:
    return stmt.op.is_("calc") or stmt.op.classical_only


def make_classical(stmt: Statement) -> Statement:
    """Keep only the classical computation of ``stmt``.

    Quantum operands and quantum condition literals are dropped and user calls switch to their
    classical projection.
    """
    if _is_classical(stmt):
        return stmt
    classical = tuple(v for v in stmt.conserved if v.is_classical)
    condition = tuple(lit for lit in stmt.condition if lit.var.is_classical)
    return Statement(
        op=stmt.op.with_mode(Mode.CLASSICAL),
        effect=Effect.PURE,
        produced_classical=stmt.produced_classical,
        conserved=classical,
        condition=condition,
        span=stmt.span,
    )


def make_adjoint(stmt: Statement) -> Statement:
    """Swap the produced and consumed variables of ``stmt`` and invert its operation.

    Garbage variables keep their position at the end of the lists, so a garbage producer
    becomes a garbage consumer. Classical outputs are dropped.
    """
    return Statement(
        op=stmt.op.inverse(),
        effect=stmt.effect,
        produced_quantum=stmt.consumed,
        conserved=stmt.conserved,
        consumed=stmt.produced_quantum,
        condition=stmt.condition,
        pair_tag=stmt.pair_tag,
        span=stmt.span,
    )


def synthesize_classical(f: FunctionDef, program: Program | None = None) -> FunctionDef:
    """Return ``f^O``, which only performs the classical computation of ``f``.

    Args:
        f:
            A measure-free function.
        program:
            Program used to compute the effect of ``f``; the declared effect is trusted when
            omitted.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``f`` measures.

    """
    _check_measure_free(f, program, "classical projection")
    body = [make_classical(s) for s in f.body if s.produced_classical]
    _logger.debug("Synthesized classical projection of {}.".format(f.key))
    return FunctionDef(
        name=f.name,
        classical_in=f.classical_in,
        body=tuple(body),
        returned_classical=f.returned_classical,
        declared_effect=Effect.PURE,
        modes=f.modes + (Mode.CLASSICAL,),
        span=f.span,
    )


def _rename_intermediates(f: FunctionDef, adjoint: FunctionDef) -> FunctionDef:
    interface = {v.ident for v in f.params + f.returns}
    taken = {name for _, name in f.all_vars()}
    mapping: dict[Var, Var] = {}
    for stmt in f.body:
        for var in stmt.produced_quantum:
            if var.ident not in interface and var not in mapping:
                mapping[var] = dataclasses.replace(var, name=fresh_name(var.name, taken, "~"))
    return Substitution(mapping).function(adjoint)


def synthesize_adjoint(f: FunctionDef, program: Program | None = None) -> FunctionDef:
    """Return ``f^adj``, the inverse of a measure-free function.

    The adjoint conserves what ``f`` conserves, consumes what ``f`` returns and returns what
    ``f`` consumes. Its body first recomputes every classical value of ``f`` with the classical
    projection of the producing statements, then runs the adjoint of every statement of ``f``
    in reverse order. Quantum intermediates get a ``~`` suffix.

    Args:
        f:
            A measure-free function.
        program:
            Program used to compute the effect of ``f``; the declared effect is trusted when
            omitted.

    Raises:
        :exc:`~unfab.exceptions.SynthesisError`:
            If ``f`` measures or still contains ``forget``.

    """
    _check_measure_free(f, program, "adjoint")
    if forget_count(f):
        raise SynthesisError(
            "Cannot synthesize the adjoint of '{}': it still forgets; synthesize its "
            "uncomputation first.".format(f.key)
        )
    prefix = [make_classical(s) for s in f.body if s.produced_classical]
    reversed_body = [make_adjoint(s) for s in reversed(f.body) if not _is_classical(s)]
    adjoint = dataclasses.replace(
        f,
        consumed_params=f.returned_quantum,
        returned_quantum=f.consumed_params,
        body=tuple(prefix + reversed_body),
        modes=f.modes + (Mode.ADJOINT,),
    )
    _logger.debug("Synthesized adjoint of {}.".format(f.key))
    return _rename_intermediates(f, adjoint)
