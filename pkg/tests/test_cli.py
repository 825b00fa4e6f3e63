import csv
import io
import subprocess
import sys

import pytest

from rotvlab import cli
from rotvlab.envsim import CSV_COLUMNS
from rotvlab.errors import SimulationDiverged


def rotvlab(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def user_cfg(tmp_path):
    def make(text):
        p = tmp_path / "user.cfg"
        p.write_text(text, encoding="utf-8")
        return p
    return make


def test_simulate_writes_csv_and_report(tmp_path, capsys):
    assert rotvlab("simulate", "--scenario", "nominal", "--controller", "lqr", "--out", tmp_path) == 0
    csv_path = tmp_path / "nominal_lqr.csv"
    rows = list(csv.reader(csv_path.open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert all(len(r) == len(CSV_COLUMNS) for r in rows[1:])
    assert (tmp_path / "nominal_lqr.txt").read_text() == capsys.readouterr().out


def test_csv_values_have_nine_significant_digits(tmp_path):
    rotvlab("simulate", "--scenario", "nominal", "--controller", "pid", "--out", tmp_path)
    for line in (tmp_path / "nominal_pid.csv").read_text().splitlines()[1:200]:
        for v in line.split(","):
            digits = v.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 9


def test_disturbed_run_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert rotvlab("simulate", "--scenario", "disturbed", "--controller", "lqr", "--seed", 7, "--out", a) == 0
    assert rotvlab("simulate", "--scenario", "disturbed", "--controller", "lqr", "--seed", 7, "--out", b) == 0
    assert (a / "disturbed_lqr_seed7.csv").read_bytes() == (b / "disturbed_lqr_seed7.csv").read_bytes()


def test_disturbed_needs_seed(tmp_path, capsys):
    assert rotvlab("simulate", "--scenario", "disturbed", "--out", tmp_path) == 2
    assert "seed" in capsys.readouterr().err


def test_missing_config_file_is_config_error(tmp_path):
    assert rotvlab("linearize", "--config", tmp_path / "nope.cfg", "--speed", 3) == 2


def test_malformed_config_is_config_error(user_cfg):
    assert rotvlab("linearize", "--config", user_cfg("mass = heavy\n"), "--speed", 3) == 2


def test_bad_weights_are_synthesis_error(user_cfg):
    assert rotvlab("gains", "--config", user_cfg("lqr.R = 0, 11, 19\n")) == 3


def test_bad_speed_list_is_config_error():
    assert rotvlab("gains", "--speeds", "1,two") == 2


def test_divergence_exit_code(monkeypatch, tmp_path):
    def boom(*a, **k):
        raise SimulationDiverged("state left the model envelope at tick 12", tick=12)

    monkeypatch.setattr("rotvlab.scenarios.simulate", boom)
    assert rotvlab("simulate", "--scenario", "nominal", "--out", tmp_path) == 4


def test_linearize_prints_a_and_b(capsys):
    assert rotvlab("linearize", "--speed", 3) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "matrix,row,z,w,phi,p,theta,q"
    assert lines[7] == "matrix,row,u1,u2,u3"
    assert len(lines) == 14
    assert [r.split(",")[0] for r in lines[1:7]] == ["A"] * 6
    assert all(len(r.split(",")) == 5 for r in lines[8:])


def test_gains_prints_schedule(capsys):
    assert rotvlab("gains", "--speeds", "1,2,3,4,5") == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0][0] == "U" and len(rows) == 6
    assert [float(r[0]) for r in rows[1:]] == [1, 2, 3, 4, 5]


def test_environment_config_fallback(monkeypatch, user_cfg, capsys):
    rotvlab("linearize", "--speed", 3)
    base = capsys.readouterr().out
    monkeypatch.setenv("ROTVLAB_CONFIG", str(user_cfg("mass = 60.0\n")))
    assert rotvlab("linearize", "--speed", 3) == 0
    assert capsys.readouterr().out != base
    monkeypatch.setenv("ROTVLAB_CONFIG", "/nonexistent/x.cfg")
    assert rotvlab("linearize", "--speed", 3) == 2


def test_compare_table(capsys):
    assert rotvlab("compare", "--scenario", "nominal") == 0
    out = capsys.readouterr().out
    assert "metric,lqr,pid,ratio" in out and "actuation ratio" in out


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "rotvlab.cli", "linearize", "--speed", "2"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and r.stdout.startswith("matrix,row")
