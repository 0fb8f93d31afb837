import json
import subprocess
import sys

import pytest

from qmalsim.cli import main
from qmalsim.data import load_csv


@pytest.fixture
def csvs(tmp_path):
    train, test = tmp_path / "train.csv", tmp_path / "test.csv"
    assert main(["synth", "--classes", "2", "--features", "8", "--per-class", "30",
                 "--separation", "6", "--seed", "7", "--out", str(train)]) == 0
    assert main(["synth", "--classes", "2", "--features", "8", "--per-class", "10",
                 "--separation", "6", "--seed", "7", "--out", str(test)]) == 0
    return train, test


def train_args(tmp_path, train, tag="a", *extra):
    return [
        "train", "--model", "qmlp", "--qubits", "4", "--epochs", "3", "--batch-size", "16",
        "--runs", "2", "--seed", "1", "--train", str(train),
        "--out", str(tmp_path / f"model_{tag}.json"), "--report", str(tmp_path / f"report_{tag}.json"),
        *extra,
    ]


def test_synth_contract(tmp_path):
    out = tmp_path / "d.csv"
    args = ["synth", "--classes", "2", "--features", "16", "--per-class", "100",
            "--separation", "6", "--seed", "7", "--out", str(out)]
    assert main(args) == 0
    ds = load_csv(out)
    assert len(ds) == 200 and set(ds.labels.tolist()) == {0, 1} and ds.n_features == 16
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first


def test_synth_usage_error(tmp_path):
    assert main(["synth", "--classes", "0", "--features", "4", "--per-class", "3",
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["synth", "--bogus"]) == 2


def test_train_defaults_mirror_protocol():
    from qmalsim.cli import build_parser

    args = build_parser().parse_args(["train", "--model", "qmlp", "--train", "t", "--out", "m", "--report", "r"])
    assert (args.epochs, args.batch_size, args.qubits, args.runs, args.layers) == (20, 64, 16, 3, 2)


def test_train_bad_architecture(tmp_path, csvs):
    train, _ = csvs
    assert main(["train", "--model", "qcnn", "--qubits", "6", "--train", str(train),
                 "--out", str(tmp_path / "m"), "--report", str(tmp_path / "r")]) == 2


def test_train_eval_report_flow(tmp_path, csvs, capsys):
    train, test = csvs
    assert main(train_args(tmp_path, train, "a", "--test", str(test), "--threads", "1")) == 0
    report = json.loads((tmp_path / "report_a.json").read_text())
    assert report["config"]["epochs"] == 3 and len(report["runs"]) == 2
    assert len(report["runs"][0]["history"]["loss"]) == 3
    assert set(report["aggregate"]) == {
        "accuracy", "macro_precision", "macro_recall", "macro_f1", "macro_fpr", "macro_fnr", "roc_auc"
    }
    eval_report = tmp_path / "eval.json"
    assert main(["eval", "--model", str(tmp_path / "model_a.json"), "--data", str(train),
                 "--report", str(eval_report), "--threads", "1"]) == 0
    first = eval_report.read_bytes()
    assert main(["eval", "--model", str(tmp_path / "model_a.json"), "--data", str(train),
                 "--report", str(eval_report), "--threads", "1"]) == 0
    assert eval_report.read_bytes() == first
    capsys.readouterr()
    assert main(["report", str(tmp_path / "report_a.json")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [l.split()[0] for l in lines[1:]] == ["Accuracy", "Precision", "Recall", "F1", "FPR", "FNR", "ROC-AUC"]
    assert main(["report", str(eval_report)]) == 0
    assert "±   0.00" in capsys.readouterr().out


def test_train_is_byte_deterministic_and_thread_independent(tmp_path, csvs):
    train, _ = csvs
    assert main(train_args(tmp_path, train, "a", "--threads", "1")) == 0
    assert main(train_args(tmp_path, train, "b", "--threads", "1")) == 0
    assert (tmp_path / "model_a.json").read_bytes() == (tmp_path / "model_b.json").read_bytes()
    assert (tmp_path / "report_a.json").read_bytes() == (tmp_path / "report_b.json").read_bytes()
    assert main(train_args(tmp_path, train, "c", "--threads", "4")) == 0
    a = json.loads((tmp_path / "report_a.json").read_text())
    c = json.loads((tmp_path / "report_c.json").read_text())
    assert a["aggregate"] == c["aggregate"]


def test_threads_env_fallback(tmp_path, csvs, monkeypatch):
    train, _ = csvs
    monkeypatch.setenv("QMALSIM_THREADS", "nope")
    assert main(train_args(tmp_path, train)) == 2
    monkeypatch.setenv("QMALSIM_THREADS", "2")
    assert main(train_args(tmp_path, train)) == 0


def test_eval_width_mismatch(tmp_path, csvs, capsys):
    train, _ = csvs
    assert main(train_args(tmp_path, train, "a", "--threads", "1")) == 0
    wide = tmp_path / "wide.csv"
    assert main(["synth", "--classes", "2", "--features", "5", "--per-class", "3", "--out", str(wide)]) == 0
    capsys.readouterr()
    assert main(["eval", "--model", str(tmp_path / "model_a.json"), "--data", str(wide),
                 "--report", str(tmp_path / "e.json")]) == 1
    err = capsys.readouterr().err
    assert "expects 8" in err and "found 5" in err


def test_gradcheck(capsys):
    assert main(["gradcheck", "--model", "qmlp", "--qubits", "4", "--tol", "1e-5"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["gradcheck", "--model", "qcnn", "--qubits", "4", "--tol", "1e-12"]) == 1
    assert "FAIL: parameter" in capsys.readouterr().out
    assert main(["gradcheck", "--model", "qcnn", "--qubits", "12"]) == 2


def test_report_errors(tmp_path):
    assert main(["report", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{\"format\": \"something-else\"}")
    assert main(["report", str(bad)]) == 1


def test_preprocess_command(tmp_path, csvs):
    train, test = csvs
    out = tmp_path / "angles.csv"
    assert main(["preprocess", "--train", str(train), "--qubits", "4", "--apply", str(test),
                 "--out", str(out)]) == 0
    ds = load_csv(out)
    assert ds.n_features == 4 and len(ds) == 20
    assert ds.features.min() >= 0 and ds.features.max() <= 3.1415926535897932


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmalsim", "gradcheck", "--model", "qmlp", "--qubits", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
