import json
import subprocess
import sys

import pytest

from quasilattice import cli
from quasilattice.export import read_pgm


def files_in(path):
    return sorted(p.name for p in path.iterdir())


def test_tiling_generate(tmp_path):
    out, svg = tmp_path / "t.json", tmp_path / "t.svg"
    assert cli.run(["tiling", "generate", "--radius", "6", "--out", str(out), "--svg", str(svg)]) == 0
    data = json.loads(out.read_text())
    assert data["n"] == 5 and data["rhombi"]
    assert svg.read_text().startswith("<svg")
    cfg = json.loads((tmp_path / "t.json.config.json").read_text())
    assert cfg["subcommand"] == "tiling generate"
    assert cfg["parameters"]["radius"] == 6.0


def test_diffraction_pgm(tmp_path):
    out = tmp_path / "p.pgm"
    assert cli.run(["diffraction", "--d", "50", "--grid", "40", "--out", str(out)]) == 0
    assert read_pgm(out).shape == (40, 40)
    assert json.loads((tmp_path / "p.pgm.json").read_text())["value_max"] > 0


def test_unknown_flag_exits_2_without_files(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert cli.run(["tiling", "generate", "--radius", "6", "--out", str(out), "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err
    assert files_in(tmp_path) == []
    assert cli.run(["chi", "map", "--out", str(tmp_path / "c.csv")]) == 2
    assert files_in(tmp_path) == []


def test_computational_error_exits_1(tmp_path, capsys):
    assert cli.run(["elliptic", "eval", "--u", "0.3", "--m", "1.5"]) == 1
    assert "ModulusOutOfRange" in capsys.readouterr().err


def test_sequences_print(capsys):
    assert cli.run(["seq", "fibonacci", "--count", "10"]) == 0
    assert "55" in capsys.readouterr().out
    assert cli.run(["seq", "fibonacci-word", "--n", "5"]) == 0
    assert "BABBA" in capsys.readouterr().out


def test_replay_is_byte_identical(tmp_path):
    out = tmp_path / "joint.csv"
    assert cli.run(["prob", "joint", "--dk0", "3", "--dk1", "5", "--resolution", "64", "--out", str(out)]) == 0
    first = out.read_bytes()
    out.unlink()
    assert cli.run(["replay", str(tmp_path / "joint.csv.config.json")]) == 0
    assert out.read_bytes() == first


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("QUASILATTICE_THREADS", "2")
    out = tmp_path / "chi.csv"
    argv = ["chi", "map", "--k", "0.5", "--patch-radius", "5", "--truncation", "2",
            "--grid", "9", "--out", str(out)]
    assert cli.run(argv) == 0
    assert len(out.read_text().splitlines()) == 82
    params = json.loads((tmp_path / "chi.csv.config.json").read_text())["parameters"]
    assert "threads" not in params


def test_console_entry_point_version():
    res = subprocess.run([sys.executable, "-m", "quasilattice.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()


@pytest.mark.parametrize("argv", [["ising", "couplings", "--k", "0.7", "--l", "2"],
                                  ["ising", "check-st", "--k", "0.4", "--samples", "5"]])
def test_ising_commands(argv, capsys):
    assert cli.run(argv) == 0
    assert capsys.readouterr().out.strip()
