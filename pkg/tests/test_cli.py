import csv
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from coss import CorruptionModel, ScenarioConfig, fit_coss, generate_scenario, matrixio
from coss.bench import AGG_HEADER, LONG_HEADER
from coss.cli import main

DATA = Path(__file__).parent / "data"

TINY = ["--set", "scenario.n=60", "--set", "scenario.p=30", "--set", "scenario.q=40",
        "--set", "scenario.rank=3", "--set", "scenario.nnz=20",
        "--set", "scenario.test_size=200"]


def read_csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestProjectPsd:
    def test_identity_is_fixed_point(self, tmp_path):
        matrixio.write_matrix(tmp_path / "m.csv", np.eye(3))
        rc = main(["project-psd", "--matrix", str(tmp_path / "m.csv"),
                   "--out", str(tmp_path / "out")])
        assert rc == 0
        out = matrixio.read_matrix(tmp_path / "out" / "projected.csv")
        assert np.array_equal(out, np.eye(3))
        report = (tmp_path / "out" / "report.txt").read_text()
        assert "distance = 0" in report

    def test_indefinite_fixture_meets_bound(self, tmp_path):
        matrixio.write_matrix(tmp_path / "m.csv", np.array([[1.0, 2.0], [2.0, 1.0]]))
        rc = main(["project-psd", "--matrix", str(tmp_path / "m.csv"),
                   "--out", str(tmp_path / "out")])
        assert rc == 0
        out = matrixio.read_matrix(tmp_path / "out" / "projected.csv")
        assert np.linalg.eigvalsh(out)[0] >= -1e-8
        assert np.max(np.abs(out - [[1, 2], [2, 1]])) <= 0.5 + 1e-4

    def test_non_square_exits_2(self, tmp_path, capsys):
        matrixio.write_matrix(tmp_path / "m.csv", np.ones((2, 3)))
        rc = main(["project-psd", "--matrix", str(tmp_path / "m.csv"),
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "square" in capsys.readouterr().err


class TestSimulate:
    def test_writes_expected_shapes(self, tmp_path):
        rc = main(["simulate", "--out", str(tmp_path / "sim"), "--seed", "3"] + TINY)
        assert rc == 0
        shapes = {"X.csv": (60, 30), "W.csv": (60, 30), "Y.csv": (60, 40),
                  "C_star.csv": (30, 40), "X_test.csv": (200, 30), "Y_test.csv": (200, 40)}
        for name, shape in shapes.items():
            assert matrixio.read_matrix(tmp_path / "sim" / name).shape == shape
        assert (tmp_path / "sim" / "model.cfg").is_file()
        assert (tmp_path / "sim" / "manifest.json").is_file()
        assert (tmp_path / "sim" / "resolved_config.cfg").is_file()

    def test_same_seed_gives_identical_files(self, tmp_path):
        for tag in ("a", "b"):
            assert main(["simulate", "--out", str(tmp_path / tag), "--seed", "11"] + TINY) == 0
        for name in ("X.csv", "W.csv", "Y.csv", "C_star.csv", "X_test.csv",
                     "Y_test.csv", "model.cfg", "noise_cov.csv", "resolved_config.cfg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_scenario_flag_switches_model(self, tmp_path):
        rc = main(["simulate", "--out", str(tmp_path / "m"), "--seed", "5",
                   "--scenario", "missing"] + TINY)
        assert rc == 0
        model_text = (tmp_path / "m" / "model.cfg").read_text()
        assert "model = missing" in model_text


class TestFit:
    def test_round_trip_matches_in_process_fit_bitwise(self, tmp_path):
        sim = tmp_path / "sim"
        assert main(["simulate", "--out", str(sim), "--seed", "9"] + TINY) == 0
        out = tmp_path / "fit"
        rc = main(["fit", "--y", str(sim / "Y.csv"), "--w", str(sim / "W.csv"),
                   "--model", str(sim / "model.cfg"), "--out", str(out)])
        assert rc == 0
        cfg = ScenarioConfig(n=60, p=30, q=40, r=3, nnz=20, test_size=200, seed=9)
        data = generate_scenario(cfg)
        fit = fit_coss(data.y, data.w, data.model)
        got = matrixio.read_matrix(out / "c_hat.csv")
        assert np.array_equal(got, fit.c_hat)
        diag = (out / "diagnostics.txt").read_text()
        assert "rank_selected = 3" in diag
        assert "psd_distance" in diag

    def test_missing_model_parameter_file_exits_2(self, tmp_path):
        sim = tmp_path / "sim"
        assert main(["simulate", "--out", str(sim), "--seed", "4"] + TINY) == 0
        (sim / "model_bad.cfg").write_text("model = additive\nnoise_cov = absent.csv\n")
        rc = main(["fit", "--y", str(sim / "Y.csv"), "--w", str(sim / "W.csv"),
                   "--model", str(sim / "model_bad.cfg"), "--out", str(tmp_path / "f")])
        assert rc == 2

    def test_golden_fixture_regression(self, tmp_path):
        # golden output generated once by a pinned run of this implementation
        fixture = DATA / "fit_fixture"
        out = tmp_path / "fit"
        rc = main(["fit", "--y", str(fixture / "Y.csv"), "--w", str(fixture / "W.csv"),
                   "--model", str(fixture / "model.cfg"), "--out", str(out)])
        assert rc == 0
        assert (out / "c_hat.csv").read_bytes() == (fixture / "golden_c_hat.csv").read_bytes()


class TestBenchmark:
    def test_tiny_benchmark_schema_and_determinism_across_threads(self, tmp_path):
        args = ["benchmark", "--seed", "42", "--replicates", "2",
                "--scenario", "additive", "--p", "30"] + TINY
        rc1 = main(args + ["--threads", "1", "--out", str(tmp_path / "t1")])
        rc8 = main(args + ["--threads", "8", "--out", str(tmp_path / "t8")])
        assert rc1 == 0 and rc8 == 0

        rows1 = read_csv_rows(tmp_path / "t1" / "replicates.csv")
        rows8 = read_csv_rows(tmp_path / "t8" / "replicates.csv")
        assert rows1[0] == LONG_HEADER
        assert rows8[0] == LONG_HEADER
        wall = LONG_HEADER.index("wall_time")
        strip = lambda rows: [r[:wall] + r[wall + 1:] for r in rows[1:]]
        assert strip(rows1) == strip(rows8)
        assert len(rows1) == 1 + 2 * 2  # header + replicates x methods

        agg = read_csv_rows(tmp_path / "t1" / "aggregate.csv")
        assert agg[0] == AGG_HEADER
        assert {r[1] for r in agg[1:]} == {"coss", "naive"}
        for r in agg[1:]:
            assert r[0] == "additive-p30"
            assert float(r[3]) > 0

    def test_unknown_config_key_exits_2(self, tmp_path):
        rc = main(["benchmark", "--out", str(tmp_path / "x"),
                   "--set", "bogus.key=1"])
        assert rc == 2


class TestConsoleEntryPoint:
    def test_installed_script_help(self):
        proc = subprocess.run([sys.executable, "-m", "coss.cli", "--help"],
                              capture_output=True, text=True)
        # argparse help exits 0 and lists the four commands
        assert proc.returncode == 0
        for cmd in ("fit", "simulate", "benchmark", "project-psd"):
            assert cmd in proc.stdout
