"""``qmalsim`` command line.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import autodiff
from .circuits import Architecture, init_params, param_layout
from .data import (
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    preprocess_apply,
    preprocess_fit,
    seed_sequence,
    write_csv,
)
from .errors import ConfigError, QmalsimError
from .metrics import METRIC_NAMES, aggregate_runs
from .training import (
    FINITE_DIFF,
    PARAM_SHIFT,
    TrainConfig,
    evaluate,
    load_model,
    run_experiment,
    save_model,
)

log = logging.getLogger("qmalsim")

REPORT_FORMAT = "qmalsim-report"
GRADCHECK_MAX_QUBITS = 8
TABLE_ROWS = (
    ("Accuracy", "accuracy"),
    ("Precision", "macro_precision"),
    ("Recall", "macro_recall"),
    ("F1 Score", "macro_f1"),
    ("FPR", "macro_fpr"),
    ("FNR", "macro_fnr"),
    ("ROC-AUC", "roc_auc"),
)


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _non_negative_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmalsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic Gaussian-blob dataset as CSV")
    p.add_argument("--classes", type=_positive_int, required=True)
    p.add_argument("--features", type=_positive_int, required=True)
    p.add_argument("--per-class", type=_positive_int, required=True)
    p.add_argument("--separation", type=_positive_float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("preprocess", help="fit Min-Max/PCA/angle rescaling on a training CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--qubits", type=_positive_int, default=16)
    p.add_argument("--apply", help="CSV to transform with the fitted pipeline")
    p.add_argument("--out", required=True, help="transformed CSV (of --apply, else of --train)")

    p = sub.add_parser("train", help="train and evaluate a hybrid model over repeated seeds")
    p.add_argument("--model", choices=["qmlp", "qcnn"], required=True)
    p.add_argument("--qubits", type=_positive_int, default=16)
    p.add_argument("--layers", type=_positive_int, default=2, help="QMLP re-uploading layers")
    p.add_argument("--classes", type=_positive_int, help="default: max label + 1")
    p.add_argument("--epochs", type=_positive_int, default=20)
    p.add_argument("--batch-size", type=_positive_int, default=64)
    p.add_argument("--lr", type=_non_negative_float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=_positive_int, default=3)
    p.add_argument("--grad", choices=["shift", "fd"], default="shift")
    p.add_argument("--train", required=True)
    p.add_argument("--test")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--report", required=True, help="JSON report file")
    p.add_argument("--threads", type=_positive_int)

    p = sub.add_parser("eval", help="evaluate a saved model on a raw CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--threads", type=_positive_int)

    p = sub.add_parser("gradcheck", help="compare parameter-shift and finite-difference Jacobians")
    p.add_argument("--model", choices=["qmlp", "qcnn"], required=True)
    p.add_argument("--qubits", type=_positive_int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=_positive_float, default=1e-5)
    p.add_argument("--step", type=_positive_float, default=1e-5)

    p = sub.add_parser("report", help="print a report file as a table")
    p.add_argument("path")
    return parser


def _threads(args) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get("QMALSIM_THREADS")
    if env:
        try:
            return _positive_int(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"QMALSIM_THREADS must be a positive integer, got {env!r}") from None
    return os.cpu_count() or 1


def _architecture(kind: str, qubits: int, layers: int = 2) -> Architecture:
    try:
        return Architecture(kind.upper(), qubits, layers if kind.upper() == "QMLP" else 2)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def write_report(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")


def cmd_synth(args) -> int:
    ds = generate_synthetic(
        SyntheticSpec(args.classes, args.features, args.per_class, args.separation, args.seed)
    )
    write_csv(ds, args.out)
    print(f"wrote {len(ds)} rows to {args.out}")
    return 0


def cmd_preprocess(args) -> int:
    train = load_csv(args.train)
    model = preprocess_fit(train, args.qubits)
    target = load_csv(args.apply, n_classes=None) if args.apply else train
    write_csv(preprocess_apply(target, model), args.out)
    print(f"wrote {len(target)} preprocessed rows with {model.k} features to {args.out}")
    return 0


def cmd_train(args) -> int:
    arch = _architecture(args.model, args.qubits, args.layers)
    threads = _threads(args)
    train_raw = load_csv(args.train, n_classes=args.classes)
    test_raw = load_csv(args.test, n_classes=train_raw.n_classes) if args.test else train_raw
    try:
        config = TrainConfig(
            arch,
            train_raw.n_classes,
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            seed=args.seed,
            runs=args.runs,
            gradient_method=PARAM_SHIFT if args.grad == "shift" else FINITE_DIFF,
        )
        pre = preprocess_fit(train_raw, arch.n_qubits)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    train_ds = preprocess_apply(train_raw, pre)
    test_ds = preprocess_apply(test_raw, pre)
    result = run_experiment(config, train_ds, test_ds, threads=threads, preprocessor=pre)
    best = result.best_run
    save_model(result.models[best], args.out)
    write_report(
        {
            "format": REPORT_FORMAT,
            "command": "train",
            "config": config.to_dict(),
            "evaluated_on": "test" if args.test else "train",
            "aggregate": result.aggregate,
            "best_run": best,
            "runs": [
                {
                    "seed": config.seed + r,
                    "metrics": report.to_dict(),
                    "history": {"loss": history.losses},
                }
                for r, (report, history) in enumerate(zip(result.reports, result.histories))
            ],
        },
        args.report,
    )
    acc = result.aggregate["accuracy"]
    print(f"accuracy {acc['mean']:.4f} +- {acc['std']:.4f} over {config.runs} run(s); best run {best}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    if model.preprocessor is None:
        raise QmalsimError(f"{args.model} carries no preprocessor; cannot evaluate raw CSV data")
    raw = load_csv(args.data, n_classes=model.n_classes)
    if raw.n_features != model.preprocessor.n_features:
        raise QmalsimError(
            f"feature width mismatch: model expects {model.preprocessor.n_features} columns, "
            f"found {raw.n_features}"
        )
    report = evaluate(model, preprocess_apply(raw, model.preprocessor), _threads(args))
    write_report(
        {
            "format": REPORT_FORMAT,
            "command": "eval",
            "n_samples": len(raw),
            "aggregate": aggregate_runs([report]),
            "runs": [{"metrics": report.to_dict()}],
        },
        args.report,
    )
    print(f"accuracy {report.accuracy:.4f} on {len(raw)} samples")
    return 0


def cmd_gradcheck(args) -> int:
    if args.qubits > GRADCHECK_MAX_QUBITS:
        raise UsageError(f"gradcheck is limited to {GRADCHECK_MAX_QUBITS} qubits, got {args.qubits}")
    if not 1e-7 <= args.step <= 1e-3:
        raise UsageError(f"--step must lie in [1e-7, 1e-3], got {args.step}")
    arch = _architecture(args.model, args.qubits)
    rng = np.random.Generator(np.random.PCG64(seed_sequence(args.seed)))
    x = rng.uniform(0, np.pi, arch.n_qubits)
    params = init_params(arch, rng)
    shift = autodiff.quantum_jacobian(arch, x, params).matrix
    fd = autodiff.fd_jacobian(arch, x, params, args.step).matrix
    dev = np.abs(shift - fd)
    for seg in param_layout(arch):
        print(f"{seg.name:<12} {seg.shift:<9} max |shift - fd| = {dev[:, seg.slice].max():.3e}")
    worst = int(np.argmax(dev.max(axis=0)))
    if dev.max() > args.tol:
        print(f"FAIL: parameter {worst} deviates by {dev.max():.3e} > tol {args.tol:.1e}")
        return 1
    print(f"PASS: max deviation {dev.max():.3e} <= tol {args.tol:.1e}")
    return 0


def format_report(doc: dict) -> str:
    agg = doc["aggregate"]
    lines = [f"{'Metric':<10} {'Mean':>8}   {'Std':>6}"]
    for label, key in TABLE_ROWS:
        if key not in agg:
            lines.append(f"{label:<10} {'n/a':>8}")
            continue
        mean, std = 100 * agg[key]["mean"], 100 * agg[key]["std"]
        lines.append(f"{label:<10} {mean:>8.2f} ± {std:>6.2f}")
    return "\n".join(lines)


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.path).read_text(encoding="utf-8"))
        if doc.get("format") != REPORT_FORMAT:
            raise ValueError("not a qmalsim report")
        text = format_report(doc)
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise QmalsimError(f"{args.path}: malformed report ({exc})") from None
    print(text)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qmalsim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (QmalsimError, OSError, ValueError) as exc:
        print(f"qmalsim {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
