from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction

from unfab.ir import BUILTINS
from unfab.ir import format_angle
from unfab.ir import FunctionDef
from unfab.ir import Mode
from unfab.ir import Operation
from unfab.ir import Program
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir._nodes import format_modes


_INDENT = "  "


def format_operation(op: Operation) -> str:
    """Format an operation with modes and static arguments, e.g. ``undup^G``, ``cat2[$i, 1]``."""
    modes = op.modes
    name = op.target
    info = BUILTINS.get(name)
    if info is not None and info.adjoint_alias and modes[:1] == (Mode.ADJOINT,):
        name = info.adjoint_alias
        modes = modes[1:]
    if info is not None and info.static == "value":
        name += str(int(op.static_args[0]))
    elif info is not None and info.static == "arity":
        name += str(int(op.static_args[0]))
    text = name + format_modes(modes)
    if info is not None and info.static == "angle":
        text += "<{}>".format(format_angle(Fraction(op.static_args[0])))
    elif info is not None and info.static == "arity":
        text += "[{}]".format(", ".join(str(w) for w in op.static_args[1:]))
    return text


def _format_decl(var: Var) -> str:
    if var.width is None:
        return str(var)
    return "{}:{}".format(var, var.width)


def _join(vars_: Sequence[Var]) -> str:
    return ", ".join(str(v) for v in vars_)


def format_statement(stmt: Statement) -> str:
    outs = ", ".join(_format_decl(v) for v in stmt.produced)
    head = (outs + " " if outs else "") + ":=" + stmt.effect.symbol
    if stmt.op.target == "calc" and not stmt.op.modes:
        body = str(stmt.op.static_args[0])
    else:
        body = format_operation(stmt.op)
        if stmt.conserved:
            body += "[{}]".format(_join(stmt.conserved))
        if stmt.consumed:
            body += "({})".format(_join(stmt.consumed))
    text = head + " " + body
    if stmt.condition:
        text += " if " + " && ".join(str(lit) for lit in stmt.condition)
    if stmt.pair_tag is not None:
        text += " @" + stmt.pair_tag
    return text


def format_function(f: FunctionDef) -> str:
    header = f.name + format_modes(f.modes)
    bracket = f.classical_in + f.conserved_params
    if bracket:
        header += "[{}]".format(", ".join(_format_decl(v) for v in bracket))
    if f.consumed_params or not bracket:
        header += "({})".format(", ".join(_format_decl(v) for v in f.consumed_params))
    header += " :=" + f.declared_effect.symbol
    returns = _join(f.returns)
    tail = "> " + returns if returns else ">"
    if not f.body:
        return "{} {{}} {}".format(header, tail)
    lines = [header + " {"]
    lines.extend(_INDENT + format_statement(s) for s in f.body)
    lines.append("} " + tail)
    return "\n".join(lines)


def print_program(program: Program) -> str:
    """Print ``program`` in canonical text form.

    Base functions come first in definition order, followed by the cached derived functions
    in derivation order. Two prints of the same program are byte-identical.
    """
    chunks = [format_function(f) for f in program.functions.values()]
    chunks.extend(format_function(f) for f in program.derived.values())
    return "\n\n".join(chunks) + "\n"
