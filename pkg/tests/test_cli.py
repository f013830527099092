import subprocess
import sys

import numpy as np
import pytest

from fuzzml.cli import main
from fuzzml.dataset import load_dataset
from fuzzml.predictor import load_model


def _write_dataset(tmp_path, prefix="data", n=40, seed=0):
    code = main([
        "synth", "--kind", "union", "--n", str(n), "--d", "4",
        "--seed", str(seed), "--out-prefix", prefix,
        "--out-dir", str(tmp_path),
    ])
    assert code == 0
    return tmp_path / ("%s.X.csv" % prefix), tmp_path / ("%s.Y.csv" % prefix)


class TestSynthAndNoise:
    def test_synth_writes_loadable_files(self, tmp_path):
        fx, fy = _write_dataset(tmp_path)
        data = load_dataset(fx, fy)
        assert (data.n_features, data.n_labels, data.n_samples) == (4, 5, 40)

    def test_noise_flips_requested_fraction(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=20)
        code = main([
            "noise", "--features", str(fx), "--labels", str(fy),
            "--ratio", "0.5", "--seed", "1", "--out-prefix", "noisy",
            "--out-dir", str(tmp_path),
        ])
        assert code == 0
        clean = load_dataset(fx, fy)
        noisy = load_dataset(tmp_path / "noisy.X.csv", tmp_path / "noisy.Y.csv")
        differs = (clean.labels != noisy.labels).any(axis=0)
        assert differs.sum() == 10
        np.testing.assert_array_equal(clean.features, noisy.features)


class TestTrainPredictEval:
    def test_full_pipeline(self, tmp_path, capsys):
        fx, fy = _write_dataset(tmp_path, n=60)
        assert main([
            "train", "--features", str(fx), "--labels", str(fy),
            "--rules", "2", "--max-iters", "3",
            "--out", "model.txt", "--out-dir", str(tmp_path),
        ]) == 0
        model = load_model(tmp_path / "model.txt")
        assert model.config.n_rules == 2

        assert main([
            "predict", "--model", str(tmp_path / "model.txt"),
            "--features", str(fx), "--out", "scores.csv",
            "--out-dir", str(tmp_path),
        ]) == 0
        scores = np.loadtxt(tmp_path / "scores.csv", delimiter=",", ndmin=2)
        assert scores.shape == (60, 5)

        capsys.readouterr()
        assert main([
            "eval", "--scores", str(tmp_path / "scores.csv"),
            "--labels", str(fy), "--out-dir", str(tmp_path),
        ]) == 0
        line = capsys.readouterr().out.strip()
        fields = line.split(",")
        assert len(fields) == 6
        ap = float(fields[0])
        assert 0.0 <= ap <= 1.0

    def test_predict_binary_output(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=30)
        main(["train", "--features", str(fx), "--labels", str(fy),
              "--rules", "2", "--max-iters", "2",
              "--out", "model.txt", "--out-dir", str(tmp_path)])
        assert main([
            "predict", "--model", str(tmp_path / "model.txt"),
            "--features", str(fx), "--out", "bits.csv", "--binary",
            "--out-dir", str(tmp_path),
        ]) == 0
        bits = np.loadtxt(tmp_path / "bits.csv", delimiter=",", ndmin=2)
        assert set(np.unique(bits)).issubset({0.0, 1.0})

    def test_export_rules(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=30)
        main(["train", "--features", str(fx), "--labels", str(fy),
              "--rules", "3", "--max-iters", "2",
              "--out", "model.txt", "--out-dir", str(tmp_path)])
        assert main([
            "export-rules", "--model", str(tmp_path / "model.txt"),
            "--out", "rules.txt", "--out-dir", str(tmp_path),
        ]) == 0
        text = (tmp_path / "rules.txt").read_text()
        assert "RULE 1" in text and "RULE 3" in text
        assert "is Small" in text and "is Large" in text
        assert "THEN y1 = " in text


class TestExperimentsCommands:
    def test_cv_writes_reports(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=40)
        assert main([
            "cv", "--features", str(fx), "--labels", str(fy),
            "--folds", "2", "--rules", "2", "--max-iters", "2",
            "--out-dir", str(tmp_path),
        ]) == 0
        report = (tmp_path / "cv_report.csv").read_text().splitlines()
        assert report[0].startswith("seed,fold,ap")
        assert len(report) == 3
        assert (tmp_path / "cv_summary.txt").exists()

    def test_grid_reports_best_cell(self, tmp_path, capsys):
        fx, fy = _write_dataset(tmp_path, n=40)
        capsys.readouterr()
        assert main([
            "grid", "--features", str(fx), "--labels", str(fy),
            "--folds", "2", "--rules", "2", "--max-iters", "2",
            "--grid-alpha", "0.1,1e6", "--out-dir", str(tmp_path),
        ]) == 0
        out = capsys.readouterr().out
        assert "best cell: alpha=0.1" in out
        cells = (tmp_path / "grid_cells.csv").read_text().splitlines()
        assert len(cells) == 3

    def test_noise_curve_sorted(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=40)
        assert main([
            "noise-curve", "--features", str(fx), "--labels", str(fy),
            "--folds", "2", "--rules", "2", "--max-iters", "2",
            "--ratios", "0.4,0.0", "--out-dir", str(tmp_path),
        ]) == 0
        rows = (tmp_path / "noise_curve.csv").read_text().splitlines()
        assert rows[0] == "ratio,mean_ap,sd_ap"
        assert rows[1].startswith("0,")
        assert rows[2].startswith("0.4,")

    def test_ablate_writes_pair(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=40)
        assert main([
            "ablate", "--features", str(fx), "--labels", str(fy),
            "--folds", "2", "--rules", "2", "--max-iters", "2",
            "--ablate", "beta", "--noise-ratio", "0.2",
            "--out-dir", str(tmp_path),
        ]) == 0
        rows = (tmp_path / "ablation_beta.csv").read_text().splitlines()
        assert rows[1].startswith("disabled,")
        assert rows[2].startswith("enabled,")


class TestConfigFileAndExitCodes:
    def test_config_file_supplies_defaults(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=30)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha=5.0\nmax-iters=2\nrules=2\n")
        assert main([
            "train", "--features", str(fx), "--labels", str(fy),
            "--config", str(cfg), "--out", "model.txt", "--out-dir", str(tmp_path),
        ]) == 0
        assert load_model(tmp_path / "model.txt").config.alpha == 5.0

    def test_cli_flag_overrides_config_file(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=30)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha=5.0\nmax-iters=2\nrules=2\n")
        assert main([
            "train", "--features", str(fx), "--labels", str(fy),
            "--config", str(cfg), "--alpha", "0.25",
            "--out", "model.txt", "--out-dir", str(tmp_path),
        ]) == 0
        assert load_model(tmp_path / "model.txt").config.alpha == 0.25

    def test_missing_file_is_data_error(self, tmp_path):
        assert main([
            "train", "--features", str(tmp_path / "nope.csv"),
            "--labels", str(tmp_path / "nope2.csv"), "--out-dir", str(tmp_path),
        ]) == 3

    def test_bad_label_file_is_data_error(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=10)
        fy.write_text("2\n" * 10)
        assert main([
            "train", "--features", str(fx), "--labels", str(fy),
            "--out-dir", str(tmp_path),
        ]) == 3

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_numerical_failure_exit_code(self, tmp_path):
        fx, fy = _write_dataset(tmp_path, n=20)
        # an overflowing correlation weight poisons the subproblem matrices
        assert main([
            "train", "--features", str(fx), "--labels", str(fy),
            "--gamma", "1e308", "--rules", "2", "--out-dir", str(tmp_path),
        ]) == 4

    def test_usage_error_exit_code(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "fuzzml", "synth", "--kind", "not-a-kind",
             "--out-prefix", "x", "--out-dir", str(tmp_path)],
            capture_output=True,
        )
        assert proc.returncode == 2

    def test_entrypoint_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "fuzzml", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        for command in ("synth", "noise", "train", "predict", "eval", "cv",
                        "grid", "noise-curve", "ablate", "export-rules"):
            assert command in proc.stdout
