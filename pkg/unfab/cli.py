"""Command line driver: parse, verify, transform, lower, simulate and benchmark programs.

Exit status is 0 on success, 1 when the input is rejected (diagnostics, parse errors, failed
simulations) and 2 when a pass hits an internal error.
"""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import json
import logging
import sys
from typing import Any
from typing import Callable

from optuna.logging import get_logger

from unfab.bench import bench_scaling
from unfab.bench import FAMILIES
from unfab.bench import MODES
from unfab.bench import parse_range
from unfab.bench import write_csv
from unfab.census import CallCensus
from unfab.exceptions import SynthesisError
from unfab.exceptions import UnfabError
from unfab.exceptions import VerificationError
from unfab.ir import FunctionDef
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import Program
from unfab.lower import DEFAULT_FUEL
from unfab.lower import emit_qasm
from unfab.lower import gate_count
from unfab.lower import lower_entry
from unfab.lower import LowerConfig
from unfab.opt import simplify
from unfab.pipeline import derive
from unfab.pipeline import prepare
from unfab.sim import input_registers
from unfab.sim import SimConfig
from unfab.sim import simulate
from unfab.sim import StateVector
from unfab.textfmt import format_function
from unfab.textfmt import parse_program
from unfab.verifier import verify_program


_logger = get_logger(__name__)

_Handler = Callable[[argparse.Namespace], int]


def _load(path: str) -> Program:
    with open(path) as f:
        return parse_program(f.read(), file=path)


def _classical_args(pairs: Sequence[str] | None) -> dict[str, int]:
    values = {}
    for pair in pairs or ():
        name, sep, value = pair.partition("=")
        if not sep:
            raise ValueError("Expected NAME=VALUE, got '{}'.".format(pair))
        values[name.strip().lstrip("$")] = int(value)
    return values


def _selected(program: Program, entry: str | None) -> list[FunctionDef]:
    if entry is None:
        return list(program.functions.values())
    if entry not in program:
        raise KeyError("Unknown function '{}'.".format(entry))
    return [program[entry]]


def _write(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w") as f:
            f.write(text)


def _print_functions(functions: Sequence[FunctionDef], output: str | None) -> None:
    _write("\n\n".join(format_function(f) for f in functions) + "\n", output)


def _check(args: argparse.Namespace) -> int:
    program = _load(args.file)
    diagnostics = verify_program(program)
    for diagnostic in diagnostics:
        print(diagnostic.render(), file=sys.stderr)
    if diagnostics:
        return 1
    for name in program.functions:
        print("{}: ok".format(name))
    return 0


def _synth_uncomp(args: argparse.Namespace) -> int:
    program = _load(args.file)
    prepared = prepare(program, naive=args.naive)
    _print_functions(_selected(prepared, args.entry), args.output)
    return 0


def _derived(mode: Mode) -> _Handler:
    def handler(args: argparse.Namespace) -> int:
        prepared = prepare(_load(args.file), naive=args.naive)
        _print_functions([derive(prepared, ModeKey(args.entry, (mode,)))], args.output)
        return 0

    return handler


def _simplify(args: argparse.Namespace) -> int:
    program = _load(args.file)
    diagnostics = verify_program(program)
    if diagnostics:
        raise VerificationError(diagnostics)
    _print_functions([simplify(f) for f in _selected(program, args.entry)], args.output)
    return 0


def _lower(args: argparse.Namespace) -> int:
    prepared = prepare(_load(args.file), naive=args.naive)
    census = CallCensus()
    circuit = lower_entry(
        prepared,
        args.entry,
        _classical_args(args.arg),
        LowerConfig(fuel=args.fuel),
        census=census,
    )
    if args.emit == "qasm":
        _write(emit_qasm(circuit), args.output)
    else:
        lines = gate_count(circuit).to_records() + census.to_records()
        _write("\n".join(lines) + "\n", args.output)
    return 0


def _simulate(args: argparse.Namespace) -> int:
    prepared = prepare(_load(args.file))
    f = derive(prepared, ModeKey(args.entry))
    classical = _classical_args(args.arg)
    registers = input_registers(f, classical)
    bits = args.input if args.input is not None else "0" * sum(w for _, w in registers)
    config = SimConfig(max_qubits=args.max_qubits, seed=args.seed)
    result = simulate(
        f,
        StateVector.from_bits(registers, bits),
        config,
        program=prepared,
        classical=classical,
    )
    lines = [result.state.format(config.tolerance)]
    lines.extend("${}={}".format(k, v) for k, v in sorted(result.classical.items()))
    _write("\n".join(line for line in lines if line) + "\n", args.output)
    return 0


def _bench(args: argparse.Namespace) -> int:
    rows = bench_scaling(args.family, args.mode, parse_range(args.n), LowerConfig(args.fuel))
    if args.output is None:
        write_csv(rows, sys.stdout)
    else:
        with open(args.output, "w", newline="") as f:
            write_csv(rows, f)
    return 0


def _add_common(parser: argparse.ArgumentParser, *, required: bool) -> None:
    parser.add_argument("file", help="Program text (.uir).")
    parser.add_argument("--entry", required=required, help="Function to process.")
    parser.add_argument("-o", "--output", help="Write the result to this file.")


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="unfab", description="Quantum IR compiler with explicit uncomputation."
    )
    parser.add_argument("--verbose", action="store_true", help="Log every pass.")
    parser.add_argument("--config", help="JSON file with default values for the flags.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    def command(name: str, handler: _Handler, text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=text)
        sub.set_defaults(handler=handler)
        commands[name] = sub
        return sub

    sub = command("check", _check, "Verify every function.")
    sub.add_argument("file", help="Program text (.uir).")

    sub = command("synth-uncomp", _synth_uncomp, "Print functions with explicit uncomputation.")
    _add_common(sub, required=False)
    sub.add_argument("--naive", action="store_true", help="Do not connect garbage.")

    for name, mode, text in (
        ("adjoint", Mode.ADJOINT, "Print the adjoint of a function."),
        ("erase", Mode.GARBAGE, "Print the garbage variant of a function."),
    ):
        sub = command(name, _derived(mode), text)
        _add_common(sub, required=True)
        sub.add_argument("--naive", action="store_true", help="Do not connect garbage.")

    sub = command("simplify", _simplify, "Print simplified functions.")
    _add_common(sub, required=False)

    sub = command("lower", _lower, "Lower a function to OpenQASM 2.0.")
    _add_common(sub, required=True)
    sub.add_argument("--arg", action="append", help="Classical argument NAME=VALUE.")
    sub.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="Maximum inlined calls.")
    sub.add_argument("--emit", choices=("qasm", "report"), default="qasm")
    sub.add_argument("--naive", action="store_true", help="Do not connect garbage.")

    sub = command("simulate", _simulate, "Simulate a function on a basis state.")
    _add_common(sub, required=True)
    sub.add_argument("--arg", action="append", help="Classical argument NAME=VALUE.")
    sub.add_argument("--input", help="Bits of the quantum parameters, in declaration order.")
    sub.add_argument("--seed", type=int, default=None, help="Seed of measurement sampling.")
    sub.add_argument("--max-qubits", type=int, default=SimConfig.max_qubits)

    sub = command("bench", _bench, "Scaling study of a recursive benchmark as CSV.")
    sub.add_argument("family", choices=sorted(FAMILIES))
    sub.add_argument("--n", default="1..10", help="Range of $n, e.g. 1..10.")
    sub.add_argument("--mode", choices=MODES, default="pipeline")
    sub.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="Maximum inlined calls.")
    sub.add_argument("-o", "--output", help="Write the CSV to this file.")
    return parser, commands


def _explicit(parser: argparse.ArgumentParser, argv: Sequence[str]) -> set[str]:
    given = set()
    for action in parser._actions:
        for option in action.option_strings:
            if any(arg == option or arg.startswith(option + "=") for arg in argv):
                given.add(action.dest)
    return given


def _apply_config(
    args: argparse.Namespace, path: str, parser: argparse.ArgumentParser, argv: Sequence[str]
) -> None:
    with open(path) as f:
        config: dict[str, Any] = json.load(f)
    if not isinstance(config, dict):
        raise ValueError("Configuration file '{}' must hold a JSON object.".format(path))
    explicit = _explicit(parser, argv)
    known = {action.dest for action in parser._actions}
    for key, value in config.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in known:
            _logger.warning("Ignoring unknown configuration key '{}'.".format(key))
            continue
        if dest not in explicit:
            setattr(args, dest, value)


def _enable_debug_logging() -> None:
    logger = logging.getLogger("unfab")
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("[%(levelname)s %(name)s] %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = _build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        _enable_debug_logging()
    try:
        if args.config is not None:
            _apply_config(args, args.config, commands[args.command], argv)
        return args.handler(args)
    except SynthesisError as e:
        print("internal error: {}".format(e), file=sys.stderr)
        return 2
    except VerificationError as e:
        for diagnostic in e.diagnostics:
            print(diagnostic.render(), file=sys.stderr)
        return 1
    except (UnfabError, KeyError, ValueError, OSError) as e:
        print("error: {}".format(e), file=sys.stderr)
        return 1
    except AssertionError as e:
        print("internal error: {}".format(e), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
