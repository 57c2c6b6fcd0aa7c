from __future__ import annotations

import json
from pathlib import Path

import pytest

from unfab.cli import main
from unfab.testing import program_text


def _write_program(tmp_path: Path, name: str) -> str:
    path = tmp_path / (name + ".uir")
    path.write_text(program_text(name))
    return str(path)


def test_check(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["check", _write_program(tmp_path, "maj")]) == 0
    assert capsys.readouterr().out == "maj: ok\n"
    assert main(["check", _write_program(tmp_path, "bad")]) == 1
    err = capsys.readouterr().err
    assert "NotForgettable" in err
    assert "bad.uir:" in err


@pytest.mark.parametrize(
    "command, expected",
    [
        (["synth-uncomp", "--entry", "maj"], "CX^G^adj"),
        (["synth-uncomp", "--entry", "maj", "--naive"], "CX^adj"),
        (["adjoint", "--entry", "maj"], "maj^adj"),
        (["erase", "--entry", "maj"], "%bin"),
        (["simplify"], "maj["),
    ],
)
def test_print_commands(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], command: list[str], expected: str
) -> None:
    path = _write_program(tmp_path, "maj")
    assert main(command[:1] + [path] + command[1:]) == 0
    assert expected in capsys.readouterr().out


def test_output_file(tmp_path: Path) -> None:
    path = _write_program(tmp_path, "epr")
    out = tmp_path / "epr.qasm"
    assert main(["lower", path, "--entry", "EPR", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "OPENQASM 2.0;"
    assert lines[-2:] == ["h q[0];", "cx q[0],q[1];"]


def test_lower_report(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = _write_program(tmp_path, "iterate")
    assert main(["lower", path, "--entry", "iterate", "--arg", "n=2", "--emit", "report"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("single=")
    assert "qubits=" in out[3]
    assert out[-1] == "forget=0"


def test_simulate(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = _write_program(tmp_path, "epr")
    assert main(["simulate", path, "--entry", "EPR"]) == 0
    assert capsys.readouterr().out == "00: 0.707107+0.000000i\n11: 0.707107+0.000000i\n"


def test_bench(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["bench", "iterate", "--n", "1..2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,single,cx,gates,qubits,census,forward,inverse,status"
    assert len(lines) == 3


def test_config_file_supplies_defaults(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = _write_program(tmp_path, "iterate")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"fuel": 1, "unknown-key": 3}))
    argv = ["--config", str(config), "lower", path, "--entry", "iterate", "--arg", "n=5"]
    assert main(argv) == 1
    assert "error:" in capsys.readouterr().err
    # Flags given on the command line win over the file.
    assert main(argv + ["--fuel", "1000000", "--emit", "report"]) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "{epr}", "--entry", "nope"],
        ["lower", "{iterate}", "--entry", "iterate", "--arg", "n"],
        ["lower", "{iterate}", "--entry", "iterate"],
        ["check", "{missing}"],
    ],
)
def test_rejected_inputs(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], argv: list[str]
) -> None:
    paths = {
        "epr": _write_program(tmp_path, "epr"),
        "iterate": _write_program(tmp_path, "iterate"),
        "missing": str(tmp_path / "missing.uir"),
    }
    assert main([arg.format(**paths) for arg in argv]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_adjoint_of_measuring_function_is_an_internal_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = _write_program(tmp_path, "teleport")
    assert main(["adjoint", path, "--entry", "teleport"]) == 2
    assert "internal error" in capsys.readouterr().err


def test_simplify_rejects_invalid_programs(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    assert main(["simplify", _write_program(tmp_path, "bad")]) == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "NotForgettable" in captured.err
