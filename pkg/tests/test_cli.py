import os

import numpy as np
import pytest

from twrpower.cli import main

SOLVE_CFG = """
[system]
n1 = 2
n2 = 2
nr = 3

[power]
p1max = 1.0
p2max = 1.5
prmax = 2.0

[run]
seed = 5
eps = 1e-6
"""

SWEEP_CFG = """
[system]
n1 = 1
n2 = 1
nr = 1

[power]
prmax = 2.0

[run]
seed = 11
trials = 3

[sweep]
pairing = zip
p1max = 0.4, 1.6
p2max = 1.6, 0.4
"""

ORACLE_CFG = """
[system]
n1 = 1
n2 = 1
nr = 1

[power]
p1max = 0.8
p2max = 0.6
prmax = 1.5

[run]
seed = 2
trials = 2
steps = 120
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestSolveCommand:
    def test_writes_outputs(self, tmp_path, capsys):
        cfg = write(tmp_path, "cfg.ini", SOLVE_CFG)
        out = tmp_path / "run"
        rc = main(["solve", "--config", cfg, "--out", str(out)])
        assert rc == 0
        trace = (out / "trace.csv").read_text()
        assert trace.startswith("# twrpower-csv v1 trace\n")
        assert trace.splitlines()[1] == "iter,R_obj,R_ma,R_bc_sum,R_tw,P1,P2,Pr"
        summary = (out / "summary.txt").read_text()
        assert "subcase = " in summary and "R_tw = " in summary

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", SOLVE_CFG)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["solve", "--config", cfg, "--out", str(a)]) == 0
        assert main(["solve", "--config", cfg, "--out", str(b)]) == 0
        assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
        assert (a / "summary.txt").read_bytes() == (b / "summary.txt").read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", SOLVE_CFG)
        a, b = tmp_path / "a", tmp_path / "b"
        main(["solve", "--config", cfg, "--out", str(a)])
        main(["solve", "--config", cfg, "--out", str(b), "--seed", "99"])
        assert (a / "trace.csv").read_bytes() != (b / "trace.csv").read_bytes()

    def test_out_env_var(self, tmp_path, monkeypatch):
        cfg = write(tmp_path, "cfg.ini", SOLVE_CFG)
        monkeypatch.setenv("TWRPOWER_OUT", str(tmp_path / "envout"))
        assert main(["solve", "--config", cfg]) == 0
        assert (tmp_path / "envout" / "trace.csv").exists()

    def test_missing_config_exits_2(self, tmp_path, capsys):
        rc = main(["solve", "--config", str(tmp_path / "nope.ini")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_config_exits_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.ini", "[system]\nbogus = 1\n")
        assert main(["solve", "--config", cfg]) == 2


class TestSweepCommand:
    def test_sweep_csv(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", SWEEP_CFG)
        out = tmp_path / "s"
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "# twrpower-csv v1 sweep"
        header = lines[1].split(",")
        assert header[:2] == ["p1max", "p2max"]
        assert "count_I1" in header and "count_II4" in header and "failures" in header
        assert len(lines) == 4  # comment + header + 2 cells
        for row in lines[2:]:
            vals = row.split(",")
            counts = list(map(int, vals[2:8]))
            assert sum(counts) + int(vals[8]) == int(vals[-1]) == 3

    def test_jobs_invariance(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", SWEEP_CFG)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["sweep", "--config", cfg, "--out", str(a)]) == 0
        assert main(["sweep", "--config", cfg, "--out", str(b), "--jobs", "2"]) == 0
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()

    def test_sweep_without_axes_exits_2(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", SOLVE_CFG)
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


class TestOracleCommand:
    def test_oracle_csv(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", ORACLE_CFG)
        out = tmp_path / "o"
        assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "oracle.csv").read_text().splitlines()
        assert lines[0] == "# twrpower-csv v1 oracle"
        assert lines[1] == "trial,seed,Rtw_alg,Rtw_oracle,dP,pass"
        assert len(lines) == 4
        assert all(r.split(",")[-1] == "1" for r in lines[2:])

    def test_zero_trials_header_only(self, tmp_path):
        cfg = write(tmp_path, "cfg.ini", ORACLE_CFG.replace("trials = 2", "trials = 0"))
        out = tmp_path / "o0"
        assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "oracle.csv").read_text().splitlines()
        assert len(lines) == 2  # version comment + header only
