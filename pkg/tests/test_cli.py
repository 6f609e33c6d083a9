import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from memaudit.data import LabeledDataset, save_dataset_csv, synth_generate

BASE = [sys.executable, "-m", "memaudit"]


def run_cli(*args):
    return subprocess.run([*BASE, *map(str, args)], capture_output=True, text=True)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    train = synth_generate(classes=3, per_class=60, dim=4, separation=5.0, seed=1)
    cal = synth_generate(classes=3, per_class=40, dim=4, separation=5.0, seed=2)
    query = synth_generate(classes=3, per_class=20, dim=4, separation=5.0, seed=3)
    save_dataset_csv(train, root / "train.csv")
    save_dataset_csv(cal, root / "cal.csv")
    save_dataset_csv(query, root / "query.csv")
    return root


TRAIN_FLAGS = ["--hidden", "8", "--epochs", "4", "--seed", "5"]


@pytest.fixture(scope="module")
def trained(workspace):
    result = run_cli("train", "--data", workspace / "train.csv", "--out", workspace / "m.ckpt", *TRAIN_FLAGS)
    assert result.returncode == 0, result.stderr
    return workspace / "m.ckpt"


@pytest.fixture(scope="module")
def predictions(workspace, trained):
    result = run_cli("predict", "--model", trained, "--data", workspace / "query.csv",
                     "--out", workspace / "preds.jsonl")
    assert result.returncode == 0, result.stderr
    return workspace / "preds.jsonl"


class TestTrain:
    def test_checkpoint_written_and_accuracy_printed(self, workspace, trained):
        assert trained.exists()
        result = run_cli("train", "--data", workspace / "train.csv", "--out", workspace / "m2.ckpt",
                         *TRAIN_FLAGS, "--format", "json")
        payload = json.loads(result.stdout)
        assert 0.0 <= payload["train_accuracy"] <= 1.0

    def test_missing_data_file_exits_3(self, workspace):
        result = run_cli("train", "--data", workspace / "absent.csv", "--out", workspace / "x.ckpt")
        assert result.returncode == 3
        assert "error" in result.stderr

    def test_rerun_identical_digest(self, workspace, trained):
        result = run_cli("train", "--data", workspace / "train.csv", "--out", workspace / "m3.ckpt", *TRAIN_FLAGS)
        assert result.returncode == 0
        assert digest(workspace / "m3.ckpt") == digest(trained)

    def test_bad_config_exits_2(self, workspace):
        result = run_cli("train", "--data", workspace / "train.csv", "--out", workspace / "x.ckpt",
                         "--epochs", "0")
        assert result.returncode == 2


class TestPredict:
    def test_file_parses_and_counts_match(self, workspace, predictions):
        lines = predictions.read_text().splitlines()
        assert len(lines) == 1 + 60
        header = json.loads(lines[0])
        assert header["num_classes"] == 3

    def test_rows_sum_to_one(self, predictions):
        for line in predictions.read_text().splitlines()[1:]:
            row = json.loads(line)
            assert abs(sum(row["probs"]) - 1.0) <= 1e-6

    def test_dimension_mismatch_exits_4(self, workspace, trained, tmp_path):
        wide = synth_generate(classes=3, per_class=5, dim=7, separation=1.0, seed=4)
        save_dataset_csv(wide, tmp_path / "wide.csv")
        result = run_cli("predict", "--model", trained, "--data", tmp_path / "wide.csv",
                         "--out", tmp_path / "p.jsonl")
        assert result.returncode == 4


class TestAudit:
    def test_member_query_reads_memorized(self, workspace, trained, tmp_path):
        # audit the training data itself: every sample should clear a threshold
        run_cli("predict", "--model", trained, "--data", workspace / "train.csv",
                "--out", workspace / "train_preds.jsonl")
        out_dir = tmp_path / "audit_member"
        result = run_cli("audit", "--target-preds", workspace / "train_preds.jsonl",
                         "--calibration", workspace / "cal.csv",
                         "--hidden", "8", "--epochs", "4", "--seed", "5",
                         "--out-dir", out_dir, "--format", "json")
        assert result.returncode == 0, result.stderr
        payload = json.loads(result.stdout)
        assert set(payload["thresholds"]) == {"correctness", "confidence", "negative_entropy"}
        assert (out_dir / "report.json").exists()
        assert (out_dir / "metric_histograms.csv").read_text().startswith("metric,")

    def test_alpha_changes_verdict_not_score(self, workspace, predictions, tmp_path):
        payloads = []
        for alpha in ("0.0001", "0.9999"):
            result = run_cli("audit", "--target-preds", predictions,
                             "--calibration", workspace / "cal.csv",
                             "--hidden", "8", "--epochs", "4", "--seed", "5",
                             "--alpha", alpha, "--out-dir", tmp_path / f"a{alpha}",
                             "--format", "json")
            assert result.returncode == 0, result.stderr
            payloads.append(json.loads(result.stdout))
        assert payloads[0]["rho_ema"] == payloads[1]["rho_ema"]

    def test_audit_deterministic_outputs(self, workspace, predictions, tmp_path):
        digests = set()
        for i in range(2):
            out_dir = tmp_path / f"det{i}"
            result = run_cli("audit", "--target-preds", predictions,
                             "--calibration", workspace / "cal.csv",
                             "--hidden", "8", "--epochs", "4", "--seed", "5",
                             "--out-dir", out_dir)
            assert result.returncode == 0
            digests.add((digest(out_dir / "report.json"), digest(out_dir / "metric_histograms.csv")))
        assert len(digests) == 1


class TestBaseline:
    def test_reports_all_three_modes(self, workspace, predictions):
        result = run_cli("baseline", "--target-preds", predictions,
                         "--calibration", workspace / "cal.csv", "--query", workspace / "query.csv",
                         "--hidden", "8", "--epochs", "4", "--seed", "5", "--format", "json")
        assert result.returncode == 0, result.stderr
        payload = json.loads(result.stdout)
        assert set(payload) == {"all_probs", "max_prob", "true_class"}
        for entry in payload.values():
            assert entry["reading"] in ("memorized", "removed")

    def test_degenerate_calibration_exits_5(self, workspace, predictions):
        # same data and same trainer seed for calibration and query model
        # make their outputs identical, the zero-denominator failure mode
        result = run_cli("baseline", "--target-preds", predictions,
                         "--calibration", workspace / "query.csv", "--query", workspace / "query.csv",
                         "--hidden", "8", "--epochs", "4", "--seed", "5")
        assert result.returncode == 5
        assert "calibration" in result.stderr

    def test_row_count_mismatch_exits_3(self, workspace, predictions):
        result = run_cli("baseline", "--target-preds", predictions,
                         "--calibration", workspace / "cal.csv", "--query", workspace / "train.csv",
                         "--hidden", "8", "--epochs", "4")
        assert result.returncode == 3


EXPERIMENT_FLAGS = [
    "--classes", "3", "--dim", "4", "--separation", "5.0",
    "--train-size", "120", "--cal-size", "60", "--folds", "2",
    "--k", "100,60", "--hidden", "8", "--epochs", "6", "--seed", "9",
]


class TestExperiment:
    def test_grid_runs_and_writes_tables(self, tmp_path):
        out_dir = tmp_path / "exp"
        result = run_cli("experiment", *EXPERIMENT_FLAGS, "--out-dir", out_dir)
        assert result.returncode == 0, result.stderr
        long_csv = (out_dir / "results_long.csv").read_text().splitlines()
        assert long_csv[0].startswith("method,variant,group,k,query")
        # ema t-test grid: 2 k-values x (2 folds + H + S)
        table = (out_dir / "ema_t.csv").read_text().splitlines()
        assert table[0] == "k,F1,F2,H,S"
        assert len(table) == 3
        for mode in ("all_probs", "max_prob", "true_class"):
            assert (out_dir / f"baseline_{mode}.csv").exists()
            assert (out_dir / f"baseline_{mode}_flags.csv").exists()

    def test_reruns_are_byte_identical(self, tmp_path):
        digests = []
        for i in range(2):
            out_dir = tmp_path / f"exp{i}"
            result = run_cli("experiment", *EXPERIMENT_FLAGS, "--out-dir", out_dir)
            assert result.returncode == 0
            digests.append({p.name: digest(p) for p in sorted(out_dir.iterdir())})
        assert digests[0] == digests[1]

    def test_unknown_flag_exits_2(self, tmp_path):
        result = run_cli("experiment", "--no-such-flag", "--out-dir", tmp_path / "x")
        assert result.returncode == 2
