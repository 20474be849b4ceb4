import csv
import json
from pathlib import Path

import numpy as np
import pytest

from pathsig.cli import parse_and_dispatch


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert parse_and_dispatch(["frobnicate"]) == 1

    def test_unknown_flag(self):
        assert parse_and_dispatch(["study", "table1", "--bogus", "1", "-o", "x"]) == 1

    def test_missing_required_flag_named(self, capsys):
        code = parse_and_dispatch(["gen-design", "-o", "/tmp/nowhere-ps"])
        captured = capsys.readouterr()
        assert code == 1
        assert "--family" in captured.err

    def test_no_command_prints_usage(self, capsys):
        assert parse_and_dispatch([]) == 1

    def test_bad_parameter_exits_one(self, tmp_path):
        code = parse_and_dispatch(
            ["gen-design", "--family", "equal_corr", "--n", "20", "--p", "5",
             "--rho", "1.5", "--seed", "1", "-o", str(tmp_path)]
        )
        assert code == 1

    def test_help_exits_zero(self):
        assert parse_and_dispatch(["--help"]) == 0


class TestGenDesign:
    def test_writes_design_and_manifest(self, tmp_path):
        code = parse_and_dispatch(
            ["gen-design", "--family", "orthogonal", "--n", "20", "--p", "4",
             "--seed", "7", "-o", str(tmp_path)]
        )
        assert code == 0
        design = np.loadtxt(tmp_path / "design.csv", delimiter=",", skiprows=1)
        assert design.shape == (20, 4)
        assert np.max(np.abs(design.T @ design - np.eye(4))) < 1e-10
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "gen-design"
        assert "design.csv" in manifest["outputs"]

    def test_response_emitted_with_beta(self, tmp_path):
        code = parse_and_dispatch(
            ["gen-design", "--family", "iid_gaussian", "--n", "30", "--p", "5",
             "--seed", "3", "--beta", "2,1", "--sigma", "0.5", "-o", str(tmp_path)]
        )
        assert code == 0
        y = np.loadtxt(tmp_path / "response.csv", delimiter=",", skiprows=1)
        assert y.shape == (30,)

    def test_lossless_roundtrip_serialization(self, tmp_path):
        parse_and_dispatch(
            ["gen-design", "--family", "iid_gaussian", "--n", "10", "--p", "3",
             "--seed", "11", "-o", str(tmp_path)]
        )
        from pathsig import make_design
        from pathsig.rng import substream_seed

        expected = make_design("iid_gaussian", 10, 3, seed=substream_seed(11, 0)).values
        loaded = np.loadtxt(tmp_path / "design.csv", delimiter=",", skiprows=1)
        assert np.array_equal(loaded, expected)


class TestPathAndCovtest:
    @pytest.fixture()
    def stored_pair(self, tmp_path):
        parse_and_dispatch(
            ["gen-design", "--family", "orthogonal", "--n", "40", "--p", "6",
             "--seed", "5", "--beta", "0", "-o", str(tmp_path)]
        )
        return tmp_path / "design.csv", tmp_path / "response.csv"

    def test_path_knots_to_stdout(self, stored_pair, capsys):
        design, response = stored_pair
        code = parse_and_dispatch(
            ["path", "--design", str(design), "--y", str(response), "--max-steps", "4"]
        )
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert out[0] == "step,lambda,event,variable,n_active"
        assert len(out) == 5
        lams = [float(line.split(",")[1]) for line in out[1:]]
        assert all(a >= b for a, b in zip(lams, lams[1:]))

    def test_covtest_stdout_csv(self, stored_pair, capsys):
        design, response = stored_pair
        code = parse_and_dispatch(
            ["covtest", "--design", str(design), "--y", str(response), "--sigma2", "1.0"]
        )
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert out[0] == "k,T,pvalue_exp1"
        for line in out[1:]:
            k, t, p = line.split(",")
            assert 0.0 <= float(p) <= 1.0

    def test_covtest_scad_on_generated_orthogonal(self, capsys):
        code = parse_and_dispatch(
            ["covtest", "--design", "orthogonal", "--n", "50", "--p", "8",
             "--seed", "9", "--penalty", "scad", "--a", "3.7"]
        )
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert len(out) == 9

    def test_covtest_scad_rejects_non_orthogonal(self, capsys):
        code = parse_and_dispatch(
            ["covtest", "--design", "iid_gaussian", "--n", "50", "--p", "8",
             "--seed", "9", "--penalty", "scad"]
        )
        assert code == 1

    def test_numerical_failure_exits_two(self, tmp_path, capsys):
        # duplicated columns make the active Gram singular
        design = tmp_path / "design.csv"
        rng = np.random.default_rng(3)
        X = rng.standard_normal((30, 3))
        X = np.column_stack([X, X[:, 0]])
        X /= np.linalg.norm(X, axis=0)
        np.savetxt(design, X, delimiter=",")
        y = X[:, 0] * 3.0
        response = tmp_path / "y.csv"
        np.savetxt(response, y, delimiter=",")
        code = parse_and_dispatch(
            ["covtest", "--design", str(design), "--y", str(response)]
        )
        assert code == 2

    def test_unwritable_output_dir_exits_one(self):
        code = parse_and_dispatch(
            ["study", "null-qq", "--n", "50", "--p", "8", "--reps", "2",
             "--seed", "3", "--threads", "1", "-o", "/dev/null/impossible"]
        )
        assert code == 1


class TestSelectK0:
    def test_select_from_covtest_output(self, tmp_path, capsys):
        stats = tmp_path / "stats.csv"
        rows = ["T"] + ["5.0", "4.0", "1.0", "0.5", "0.33", "0.25", "0.2", "0.17", "0.14", "0.12"]
        stats.write_text("\n".join(rows) + "\n")
        code = parse_and_dispatch(
            ["select-k0", "--stats", str(stats), "--d", "3", "--k-min", "0", "--k-max", "4"]
        )
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert out[0] == "metric,value,stderr"
        values = {line.split(",")[0]: line.split(",")[1] for line in out[1:]}
        assert values["k0_hat"] == "2"  # T_3.. ~ 1/j pattern centers Q_2 at 1


class TestStudyCommand:
    def test_study_writes_outputs(self, tmp_path):
        out = tmp_path / "run"
        code = parse_and_dispatch(
            ["study", "null-qq", "--n", "50", "--p", "8", "--reps", "5",
             "--seed", "3", "--threads", "1", "-o", str(out)]
        )
        assert code == 0
        per_rep = _read_csv(out / "per_rep.csv")
        assert len(per_rep) == 6  # header + 5 reps
        summary = _read_csv(out / "summary.csv")
        assert summary[0] == ["metric", "value", "stderr"]
        assert (out / "qq.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["n_reps"] == 5
        assert set(manifest["outputs"]) >= {"per_rep.csv", "summary.csv", "qq.csv"}

    def test_manifest_rerun_reproduces_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = ["study", "independence", "--n", "40", "--p", "6", "--reps", "6",
                "--seed", "11", "--threads", "1"]
        assert parse_and_dispatch(args + ["-o", str(out1)]) == 0
        assert parse_and_dispatch(
            ["study", "independence", "--config", str(out1 / "manifest.json"), "-o", str(out2)]
        ) == 0
        for name in ("per_rep.csv", "summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_flag_overrides_config(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        parse_and_dispatch(
            ["study", "null-qq", "--n", "50", "--p", "8", "--reps", "4",
             "--seed", "3", "--threads", "1", "-o", str(out1)]
        )
        code = parse_and_dispatch(
            ["study", "null-qq", "--config", str(out1 / "manifest.json"),
             "--reps", "2", "-o", str(out2)]
        )
        assert code == 0
        assert len(_read_csv(out2 / "per_rep.csv")) == 3

    def test_power_study_emits_curve(self, tmp_path):
        out = tmp_path / "power"
        code = parse_and_dispatch(
            ["study", "power", "--n", "40", "--p", "6", "--reps", "10",
             "--seed", "5", "--theta-grid", "0,4", "--threads", "1", "-o", str(out)]
        )
        assert code == 0
        curve = _read_csv(out / "power_curve.csv")
        assert curve[0] == ["theta", "statistic", "rule", "power"]
        assert len(curve) == 1 + 2 * 4

    def test_seventeen_digit_roundtrip(self, tmp_path):
        out = tmp_path / "run"
        parse_and_dispatch(
            ["study", "null-qq", "--n", "50", "--p", "8", "--reps", "3",
             "--seed", "3", "--threads", "1", "-o", str(out)]
        )
        rows = _read_csv(out / "per_rep.csv")
        from pathsig import default_config, run_study

        res = run_study(default_config("null_qq", n=50, p=8, n_reps=3, seed=3, threads=1))
        header = rows[0]
        for row, rep_row in zip(rows[1:], res.per_rep):
            for name, cell in zip(header, row):
                if name == "rep":
                    continue
                assert float(cell) == rep_row[name]

    def test_env_threads_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PATHSIG_THREADS", "1")
        out = tmp_path / "run"
        code = parse_and_dispatch(
            ["study", "null-qq", "--n", "50", "--p", "8", "--reps", "2",
             "--seed", "3", "-o", str(out)]
        )
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["threads"] == 1
