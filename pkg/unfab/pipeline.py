from __future__ import annotations

from optuna.logging import get_logger

from unfab.adjoint import synthesize_adjoint
from unfab.adjoint import synthesize_classical
from unfab.garbage import connect_pairs
from unfab.garbage import erase_uncomputation
from unfab.ir import FunctionDef
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import Program
from unfab.opt import simplify
from unfab.uncomp import forget_count
from unfab.uncomp import synthesize_uncomputation
from unfab.verifier import ensure_valid


_logger = get_logger(__name__)


def uncompute(f: FunctionDef, *, naive: bool = False) -> FunctionDef:
    """Return ``f^U``: ``f`` with explicit, simplified uncomputation.

    Compute/uncompute pairs are connected through garbage so that derived garbage variants can
    erase them; ``naive`` skips the connection and every derived function then recomputes its
    callees by plain adjoints.
    """
    result = simplify(synthesize_uncomputation(f))
    if not naive:
        result = connect_pairs(result)
    return result


def prepare(program: Program, *, naive: bool = False, verify: bool = True) -> Program:
    """Replace every function of ``program`` by its explicit-uncomputation form.

    Args:
        program:
            A parsed program.
        naive:
            Skip garbage connection.
        verify:
            Check every function before transforming it.

    Returns:
        A new program with an empty derived-function cache.

    Raises:
        :exc:`~unfab.exceptions.VerificationError`:
            If ``verify`` is set and a function is rejected.

    """
    prepared = Program()
    for name, f in program.functions.items():
        if verify:
            ensure_valid(f, program)
        prepared.functions[name] = uncompute(f, naive=naive)
    # Hand-written derived functions override synthesized ones.
    for key, f in program.derived.items():
        prepared.derived[key] = f
    _logger.debug(
        "Prepared {} functions ({} mode).".format(
            len(prepared.functions), "naive" if naive else "pipeline"
        )
    )
    return prepared


def _explicit(f: FunctionDef) -> FunctionDef:
    return uncompute(f) if forget_count(f) else f


def derive(program: Program, key: ModeKey) -> FunctionDef:
    """Return the function named by ``key``, deriving and caching it on demand.

    The mode word is applied left to right: ``f^G^adj`` is the adjoint of ``f^G``. Adjoint and
    garbage variants of a function that still forgets, as in a program that was not
    prepared, start from its explicit uncomputation ``f^U``.

    Raises:
        :exc:`KeyError`:
            If the base function does not exist.
        :exc:`~unfab.exceptions.SynthesisError`:
            If a mode cannot be applied, e.g. the adjoint of a measuring function.

    """
    known = program.lookup(key)
    if known is not None:
        return known
    if not key.modes:
        raise KeyError("Unknown function '{}'.".format(key.base))
    if key.modes == (Mode.CLASSICAL,):
        derived = synthesize_classical(derive(program, ModeKey(key.base)), program)
    elif key.modes[-1] is Mode.ADJOINT:
        derived = synthesize_adjoint(_explicit(derive(program, key.parent)), program)
    else:
        derived = erase_uncomputation(_explicit(derive(program, key.parent)), program)
    _logger.debug("Derived {}.".format(key))
    return program.remember(derived)


def materialize(program: Program, entry: ModeKey) -> Program:
    """Derive every function reachable from ``entry`` into the cache of ``program``."""
    pending = [entry]
    seen = {entry}
    while pending:
        f = derive(program, pending.pop())
        for stmt in f.body:
            if stmt.op.is_builtin:
                continue
            key = stmt.op.key
            if key not in seen:
                seen.add(key)
                pending.append(key)
    return program
