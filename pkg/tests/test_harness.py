import csv
import os
import subprocess
import sys
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from triodflow import acceptance
from triodflow import io as tio
from triodflow.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from triodflow.config import PRESETS, load_config, parse_config
from triodflow.errors import ConfigError
from triodflow.geometry import DomainShape

HEADER = ("t,L1,L2,L3,L,k2_int,k_sup,theta_p0,theta_p1,b_rate_p0,b_rate_p1,"
          "E,Ox,Oy,res_angle,res_sumk,res_sumlambda")

BASE = """
name = "{name}"
record_every = 5
[endpoints]
angles_deg = [90.0, 210.0, 330.0]
[initial]
kind = "perturbed"
amplitude = 0.1
seed = 7
[solver]
n_nodes = 32
t_max = 1.0
{extra}
"""


def write_cfg(tmp_path, name="case", extra=""):
    p = tmp_path / f"{name}.toml"
    p.write_text(BASE.format(name=name, extra=extra))
    return str(p)


def cli(*args, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "triodflow.cli", *args], capture_output=True, text=True, env=e)


@pytest.fixture(scope="module")
def equilateral_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "eq"
    assert main(["run", "equilateral", "--out", str(out)]) == EXIT_OK
    return out


class TestRun:
    def test_outputs(self, equilateral_run):
        out = equilateral_run
        for name in ("monitors.csv", "final_nodes.txt", "final_state.json"):
            assert (out / name).is_file()
        d, st = tio.read_final_state(str(out / "final_state.json"))
        assert d["stop_kind"] == "SteadyState"
        assert d["n_snapshots"] == len(tio.snapshot_paths(str(out)))
        assert abs(sum(d["lengths"]) - 3.0) < 1e-3

    def test_monitor_header_exact(self, equilateral_run):
        with open(equilateral_run / "monitors.csv") as fh:
            assert fh.readline().rstrip("\n") == HEADER

    def test_monitor_rows_are_finite(self, equilateral_run):
        header, data = tio.read_csv_table(str(equilateral_run / "monitors.csv"))
        assert data.shape[1] == len(header)
        assert np.isfinite(data).all()
        assert np.all(np.diff(data[:, 0]) > 0)
        L = data[:, header.index("L")]
        assert np.all(np.diff(L) <= 1e-12)

    def test_replay_is_bit_identical(self, equilateral_run, tmp_path):
        assert main(["run", "equilateral", "--out", str(tmp_path / "again")]) == EXIT_OK
        for name in ("monitors.csv", "final_nodes.txt"):
            assert (tmp_path / "again" / name).read_bytes() == (equilateral_run / name).read_bytes()

    def test_replay_independent_of_thread_cap(self, tmp_path):
        a = cli("run", "steiner-exact", "--out", str(tmp_path / "a"), env={"TRIODFLOW_THREADS": "1"})
        b = cli("run", "steiner-exact", "--out", str(tmp_path / "b"), env={"TRIODFLOW_THREADS": "4"})
        assert a.returncode == b.returncode == EXIT_OK
        assert (tmp_path / "a" / "monitors.csv").read_bytes() == (tmp_path / "b" / "monitors.csv").read_bytes()

    def test_output_dir_from_config(self, tmp_path):
        target = (tmp_path / "cfgdir").as_posix()
        cfg = tmp_path / "short.toml"
        cfg.write_text(BASE.format(name="short", extra="") .replace("t_max = 1.0", "t_max = 0.01")
                       + f'[output]\ndir = "{target}"\n')
        assert main(["run", str(cfg)]) == EXIT_OK
        assert (tmp_path / "cfgdir" / "monitors.csv").is_file()

    def test_config_error_exit(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("name = [unterminated\n")
        assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
        assert main(["run", "no-such-preset"]) == EXIT_CONFIG
        assert main(["run", write_cfg(tmp_path, "x", "bogus = 1"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_solver_error_exit(self, tmp_path):
        cfg = write_cfg(tmp_path, "faulty", "junction_fault = true")
        r = cli("run", cfg, "--out", str(tmp_path / "o"))
        assert r.returncode == EXIT_SOLVER
        assert "JunctionSolveFailed" in r.stderr


class TestConfig:
    @pytest.mark.parametrize("name", PRESETS)
    def test_presets_load(self, name):
        sc = load_config(name)
        assert sc.build_initial().N == sc.solver.n_nodes

    @pytest.mark.parametrize("patch,msg", [
        ({"record_every": 0}, "record_every"),
        ({"initial": {"kind": "spiral"}}, "initial.kind"),
        ({"initial": {"kind": "perturbed", "amplitude": -1.0, "seed": 1}}, "amplitude"),
        ({"initial": {"kind": "perturbed", "amplitude": 0.1, "seed": 1.5}}, "seed"),
        ({"endpoints": {"points": [[1.0, 0.0], [0.0, 1.0]]}}, "three"),
        ({"endpoints": {"points": [[1.0, 0.0], [0.0, 1.0], [0.2, 0.2]]}}, "boundary"),
        ({"solver": {"cfl": -1.0}}, "solver"),
        ({"probes": [{"x0": [0.0, 0.0], "T_hat": -2.0}]}, "T_hat"),
    ])
    def test_invalid(self, patch, msg):
        data = {"name": "x", "endpoints": {"angles_deg": [90.0, 210.0, 330.0]},
                "initial": {"kind": "perturbed", "amplitude": 0.1, "seed": 1}}
        data.update(patch)
        with pytest.raises(ConfigError, match=msg):
            parse_config(data)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        sc = load_config("equilateral")
        from triodflow.solver import FlowState

        st = FlowState(0.125, sc.build_initial(), step_index=9)
        tio.write_snapshot(str(tmp_path / "s.txt"), st)
        back = tio.read_snapshot(str(tmp_path / "s.txt"), sc.domain)
        assert back.t == st.t and back.step_index == 9
        assert np.array_equal(back.points, st.points)

    def test_garbage(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("# t 0\n0 0 1 2 3\n")
        with pytest.raises(ConfigError):
            tio.read_snapshot(str(p), DomainShape.disc())


class TestBlowup:
    def test_frames(self, equilateral_run):
        d, _ = tio.read_final_state(str(equilateral_run / "final_state.json"))
        T = d["t"] + 1e-3
        assert main(["blowup", str(equilateral_run), "--x0", "0.1,0.05", "--T", str(T), "--svg-every", "10"]) == EXIT_OK
        with open(equilateral_run / "blowup" / "frames.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["frak_t", "density", "integrand", "class", "fit_residual"]
        assert len(rows) == d["n_snapshots"]
        dens = np.array([float(r["density"]) for r in rows])
        assert np.all((dens >= 0) & (dens <= 2))
        assert {r["class"] for r in rows} <= {"Unclassified", "Empty", "Line", "FlatTriod", "Halfline"}
        assert (equilateral_run / "blowup" / "frames" / "frame_00000.svg").is_file()

    def test_missing_dir(self, tmp_path):
        assert main(["blowup", str(tmp_path / "absent"), "--x0", "0,0", "--T", "1"]) == EXIT_CONFIG

    def test_empty_dir(self, tmp_path):
        assert main(["blowup", str(tmp_path), "--x0", "0,0", "--T", "1"]) == EXIT_CONFIG

    def test_horizon_before_all_snapshots(self, equilateral_run):
        assert main(["blowup", str(equilateral_run), "--x0", "0,0", "--T", "-1"]) == EXIT_CONFIG

    def test_bad_point(self):
        with pytest.raises(SystemExit):
            main(["blowup", ".", "--x0", "zero", "--T", "1"])


class TestSteinerCommand:
    def test_interior(self, capsys):
        assert main(["steiner", "0,0", "4,0", "0,3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "interior Fermat point" in out
        assert "120.000000000 120.000000000 120.000000000" in out

    def test_degenerate(self, capsys):
        assert main(["steiner", "--", "0,0", "1,0", "-10,0.1"]) == EXIT_OK
        assert "degenerate: junction at endpoint 1" in capsys.readouterr().out

    def test_negative_coordinates_after_separator(self, capsys):
        assert main(["steiner", "--", "-1,0", "1,0", "0,2"]) == EXIT_OK

    def test_collinear(self):
        assert main(["steiner", "0,0", "1,0", "2,0"]) == EXIT_CONFIG


class TestRender:
    def _classes(self, path):
        root = ET.parse(path).getroot()
        return {el.get("class") for el in root.iter() if el.get("class")}

    def test_snapshot_and_final(self, equilateral_run, tmp_path):
        snap = tio.snapshot_paths(str(equilateral_run))[-1]
        for src in (snap, str(equilateral_run / "final_state.json")):
            out = tmp_path / "r.svg"
            assert main(["render", src, str(out)]) == EXIT_OK
            assert {"domain", "curve-1", "curve-2", "curve-3", "junction"} <= self._classes(out)

    def test_unreadable(self, tmp_path):
        assert main(["render", str(tmp_path / "nope.json"), str(tmp_path / "o.svg")]) == EXIT_CONFIG


class TestCheck:
    def test_unknown_suite(self):
        assert main(["check", "medium"]) == EXIT_CONFIG

    def test_run_suite_rejects_unknown(self):
        with pytest.raises(ValueError):
            acceptance.run_suite("medium")
        with pytest.raises(ValueError):
            acceptance.run_suite("fast", fault="nope")

    def test_thread_cap(self, monkeypatch):
        monkeypatch.setenv("TRIODFLOW_THREADS", "3")
        assert acceptance.thread_cap() == 3

    def test_fault_fails_angle_criterion(self, monkeypatch, capsys):
        monkeypatch.setitem(acceptance.SUITE_MEMBERS, "fast", (6,))
        assert main(["check", "fast", "--inject-fault", "junction-sign", "--workers", "1"]) == EXIT_CHECK_FAILED
        out = capsys.readouterr().out
        assert "[FAIL] C6" in out

    @pytest.mark.slow
    def test_fast_suite_under_two_minutes(self):
        t0 = time.perf_counter()
        r = cli("check", "fast")
        assert r.returncode == EXIT_OK, r.stdout + r.stderr
        assert time.perf_counter() - t0 < 120
        assert r.stdout.count("[PASS]") == len(acceptance.SUITE_MEMBERS["fast"])
