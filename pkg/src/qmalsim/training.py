"""End-to-end hybrid training, evaluation, repeated runs, and model files."""
from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import autodiff
from .circuits import Architecture, ParameterVector, forward, init_params, param_count, param_layout
from .data import Dataset, PreprocessorModel, batches, seed_sequence
from .errors import ConfigError, ModelFormatError, ShapeError, TrainingError, VersionError
from .metrics import MetricsReport, aggregate_runs, confusion, roc_auc, scalar_metrics
from .nn import AdamState, LinearHead, adam_step, head_backward, head_forward, init_head

__all__ = [
    "PARAM_SHIFT",
    "FINITE_DIFF",
    "FORMAT_VERSION",
    "TrainConfig",
    "HybridModel",
    "TrainHistory",
    "ExperimentResult",
    "batch_gradient",
    "train",
    "evaluate",
    "run_experiment",
    "model_to_text",
    "save_model",
    "load_model",
]

log = logging.getLogger(__name__)

PARAM_SHIFT = "PARAM_SHIFT"
FINITE_DIFF = "FINITE_DIFF"
FORMAT_VERSION = 1
_MODEL_MAGIC = "qmalsim-model"

# Upper bound on amplitudes simulated in one call (~64 MiB of complex128).
_AMPLITUDE_BUDGET = 1 << 22


@dataclass
class TrainConfig:
    architecture: Architecture
    n_classes: int
    epochs: int = 20
    batch_size: int = 64
    lr: float = 0.01
    seed: int = 0
    runs: int = 3
    gradient_method: str = PARAM_SHIFT
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.n_classes < 2:
            raise ConfigError(f"n_classes must be >= 2, got {self.n_classes}")
        if not self.lr >= 0:
            raise ConfigError(f"lr must be non-negative, got {self.lr}")
        if self.gradient_method not in (PARAM_SHIFT, FINITE_DIFF):
            raise ConfigError(f"unknown gradient method {self.gradient_method!r}")

    def to_dict(self) -> dict:
        arch = self.architecture
        return {
            "model": arch.kind,
            "qubits": arch.n_qubits,
            "layers": arch.n_layers,
            "classes": self.n_classes,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "seed": self.seed,
            "runs": self.runs,
            "gradient_method": self.gradient_method,
        }


@dataclass
class HybridModel:
    architecture: Architecture
    quantum_params: ParameterVector
    head: LinearHead
    preprocessor: Optional[PreprocessorModel] = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.head.n_inputs != self.architecture.n_outputs:
            raise ShapeError(
                f"head takes {self.head.n_inputs} inputs but the circuit measures "
                f"{self.architecture.n_outputs} qubits"
            )
        if self.preprocessor is not None and self.preprocessor.k != self.architecture.n_qubits:
            raise ShapeError(
                f"preprocessor emits {self.preprocessor.k} features for {self.architecture.n_qubits} qubits"
            )

    @property
    def n_classes(self) -> int:
        return self.head.n_classes

    def log_probs(self, features, threads: int = 1) -> np.ndarray:
        """Log-probabilities for already-preprocessed features (angles)."""
        z = _forward_chunked(self.architecture, features, self.quantum_params.values, threads)
        return head_forward(z, self.head)


@dataclass
class TrainHistory:
    losses: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)


@dataclass
class ExperimentResult:
    aggregate: dict
    reports: List[MetricsReport]
    models: List[HybridModel]
    histories: List[TrainHistory]

    @property
    def best_run(self) -> int:
        # Highest accuracy; argmax keeps the lowest run index on ties.
        return int(np.argmax([r.accuracy for r in self.reports]))


def _chunks(n: int, size: int):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def _map_chunks(fn, spans, threads: int):
    # Results come back in span order regardless of scheduling.
    if threads <= 1 or len(spans) <= 1:
        return [fn(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), spans))


def _forward_chunked(arch: Architecture, xs, theta, threads: int = 1) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != arch.n_qubits:
        raise ShapeError(f"expected features of width {arch.n_qubits}, found shape {xs.shape}")
    per_call = max(1, _AMPLITUDE_BUDGET >> arch.n_qubits)
    parts = _map_chunks(lambda a, b: forward(arch, xs[a:b], theta), _chunks(len(xs), per_call), threads)
    return np.concatenate(parts, axis=0)


def _jacobians(arch: Architecture, xs, theta, method: str, fd_step: float, threads: int) -> np.ndarray:
    if method == PARAM_SHIFT:
        rows = autodiff.evaluations_per_gradient(arch)
    else:
        rows = 2 * param_count(arch)
    per_call = max(1, (_AMPLITUDE_BUDGET >> arch.n_qubits) // rows)

    def work(a, b):
        if method == PARAM_SHIFT:
            return autodiff.batch_jacobian(arch, xs[a:b], theta, max_rows=per_call * rows)
        return np.stack([autodiff.fd_jacobian(arch, x, theta, fd_step).matrix for x in xs[a:b]])

    return np.concatenate(_map_chunks(work, _chunks(len(xs), per_call), threads), axis=0)


def batch_gradient(
    arch: Architecture,
    theta: np.ndarray,
    head: LinearHead,
    xs,
    labels,
    method: str = PARAM_SHIFT,
    fd_step: float = 1e-5,
    threads: int = 1,
):
    """Batch-mean loss gradient over ``(theta || W || b)``.

    Returns ``(gradient, per_sample_losses)``.
    """
    xs = np.asarray(xs, dtype=float)
    labels = np.asarray(labels)
    z = _forward_chunked(arch, xs, theta, threads)
    logp = head_forward(z, head)
    losses = -logp[np.arange(len(labels)), labels]
    dw, db, dz = head_backward(z, head, labels)
    jac = _jacobians(arch, xs, theta, method, fd_step, threads)
    dtheta = np.zeros(theta.shape[-1])
    for s in range(len(xs)):
        dtheta += autodiff.hybrid_backward(jac[s], dz[s])
    return np.concatenate([dtheta, dw.ravel(), db]), losses


def train(
    config: TrainConfig,
    train_ds: Dataset,
    eval_ds: Optional[Dataset] = None,
    threads: int = 1,
    preprocessor: Optional[PreprocessorModel] = None,
):
    """Train one model; returns ``(HybridModel, TrainHistory)``.

    ``train_ds`` must already be preprocessed to ``n_qubits`` angles. One Adam
    step is taken per batch over the concatenated quantum and head parameters.
    """
    arch = config.architecture
    if train_ds.n_features != arch.n_qubits:
        raise ShapeError(f"training data has {train_ds.n_features} features, circuit has {arch.n_qubits} qubits")
    if train_ds.n_classes > config.n_classes:
        raise ShapeError(f"data has {train_ds.n_classes} classes, config allows {config.n_classes}")
    rng = np.random.Generator(np.random.PCG64(seed_sequence(config.seed)))
    theta = init_params(arch, rng).values
    head = init_head(config.n_classes, arch.n_outputs, rng)
    n_q = theta.size
    flat = np.concatenate([theta, head.flat()])
    adam = AdamState.zeros(flat.size, lr=config.lr)
    history = TrainHistory()
    for epoch in range(config.epochs):
        start = time.perf_counter()
        sample_losses = np.empty(len(train_ds))
        for b, idx in enumerate(batches(len(train_ds), config.batch_size, config.seed, epoch)):
            head = LinearHead.from_flat(flat[n_q:], config.n_classes, arch.n_outputs)
            grad, losses = batch_gradient(
                arch, flat[:n_q], head, train_ds.features[idx], train_ds.labels[idx],
                config.gradient_method, config.fd_step, threads,
            )
            if not np.all(np.isfinite(losses)):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {b}")
            sample_losses[idx] = losses
            flat, adam = adam_step(flat, grad, adam)
        history.losses.append(float(sample_losses.mean()))
        history.seconds.append(time.perf_counter() - start)
        log.info("epoch %d/%d loss %.6f", epoch + 1, config.epochs, history.losses[-1])
    model = HybridModel(
        arch,
        ParameterVector(flat[:n_q].copy(), param_layout(arch)),
        LinearHead.from_flat(flat[n_q:], config.n_classes, arch.n_outputs),
        preprocessor,
    )
    if eval_ds is not None:
        log.info("eval accuracy %.4f", evaluate(model, eval_ds, threads).accuracy)
    return model, history


def evaluate(model: HybridModel, ds: Dataset, threads: int = 1) -> MetricsReport:
    """Metrics of ``model`` on preprocessed ``ds``.

    ROC-AUC is left as ``None`` when ``ds`` holds a single class.
    """
    if ds.n_features != model.architecture.n_qubits:
        raise ShapeError(
            f"expected {model.architecture.n_qubits} preprocessed features, found {ds.n_features}"
        )
    n_classes = model.n_classes
    if ds.n_classes > n_classes:
        raise ShapeError(f"dataset has {ds.n_classes} classes, model predicts {n_classes}")
    probs = np.exp(model.log_probs(ds.features, threads))
    predictions = np.argmax(probs, axis=1)
    report = scalar_metrics(confusion(ds.labels, predictions, n_classes))
    if np.unique(ds.labels).size > 1:
        scores = probs[:, 1] if n_classes == 2 else probs
        report.roc_auc = roc_auc(ds.labels, scores, n_classes)
    return report


def run_experiment(config: TrainConfig, train_ds: Dataset, test_ds: Dataset, threads: int = 1,
                   preprocessor: Optional[PreprocessorModel] = None) -> ExperimentResult:
    """Train ``config.runs`` fresh models (seeds seed, seed+1, ...) and aggregate test metrics."""
    reports, models, histories = [], [], []
    for r in range(config.runs):
        run_config = TrainConfig(**{**config.__dict__, "seed": config.seed + r})
        model, history = train(run_config, train_ds, threads=threads, preprocessor=preprocessor)
        reports.append(evaluate(model, test_ds, threads))
        models.append(model)
        histories.append(history)
        log.info("run %d/%d accuracy %.4f", r + 1, config.runs, reports[-1].accuracy)
    return ExperimentResult(aggregate_runs(reports), reports, models, histories)


# --- model files -------------------------------------------------------------
# Layout (JSON, fixed key order):
#   format, format_version, checksum ("sha256:<hex>" of the compact payload), payload
#   payload: architecture{kind, n_qubits, n_layers}, n_classes,
#            layout[[name, offset, length, shift]...], quantum_params[...],
#            head{weights[[...]], bias[...]}, preprocessor{...}|null
# Floats are written with the shortest repr that round-trips exactly.

def _payload(model: HybridModel) -> dict:
    arch = model.architecture
    return {
        "architecture": {"kind": arch.kind, "n_qubits": arch.n_qubits, "n_layers": arch.n_layers},
        "n_classes": model.n_classes,
        "layout": [[s.name, s.offset, s.length, s.shift] for s in model.quantum_params.layout],
        "quantum_params": model.quantum_params.values.tolist(),
        "head": {"weights": model.head.weights.tolist(), "bias": model.head.bias.tolist()},
        "preprocessor": None if model.preprocessor is None else model.preprocessor.to_dict(),
    }


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, separators=(",", ":"), allow_nan=False).encode("utf-8")
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def model_to_text(model: HybridModel) -> str:
    payload = _payload(model)
    doc = {
        "format": _MODEL_MAGIC,
        "format_version": model.format_version,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def save_model(model: HybridModel, path) -> None:
    Path(path).write_text(model_to_text(model), encoding="utf-8")


def load_model(path) -> HybridModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: malformed model file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != _MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a {_MODEL_MAGIC} file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise VersionError(doc.get("format_version"), FORMAT_VERSION)
    try:
        payload = doc["payload"]
        if _checksum(payload) != doc["checksum"]:
            raise ModelFormatError(f"{path}: checksum mismatch")
        a = payload["architecture"]
        arch = Architecture(a["kind"], a["n_qubits"], a["n_layers"])
        layout = param_layout(arch)
        if [[s.name, s.offset, s.length, s.shift] for s in layout] != payload["layout"]:
            raise ModelFormatError(f"{path}: parameter layout does not match {arch.kind}")
        head = LinearHead(np.array(payload["head"]["weights"], dtype=float),
                          np.array(payload["head"]["bias"], dtype=float))
        pre = payload["preprocessor"]
        return HybridModel(
            arch,
            ParameterVector(np.array(payload["quantum_params"], dtype=float), layout),
            head,
            None if pre is None else PreprocessorModel.from_dict(pre),
            doc["format_version"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: malformed model file ({exc!r})") from None
