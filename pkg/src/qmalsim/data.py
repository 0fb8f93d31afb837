"""Datasets and the Min-Max -> PCA -> angle-rescale preprocessing pipeline.

Every stage is fitted on the training split only; at apply time values that
fall outside the training range are clamped, so embedding angles always lie
in [0, pi].
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConfigError, EmptyDatasetError, ParseError, ShapeError

__all__ = [
    "Dataset",
    "PreprocessorModel",
    "SyntheticSpec",
    "load_csv",
    "write_csv",
    "minmax_fit",
    "minmax_apply",
    "jacobi_eigh",
    "pca_fit",
    "pca_apply",
    "angle_rescale_fit",
    "angle_rescale_apply",
    "preprocess_fit",
    "preprocess_apply",
    "generate_synthetic",
    "batches",
    "seed_sequence",
    "split_per_class",
]


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise EmptyDatasetError("dataset has no samples")
        if self.labels.shape != (self.features.shape[0],):
            raise ShapeError(f"{self.features.shape[0]} feature rows but {self.labels.shape} labels")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def load_csv(path, n_classes: Optional[int] = None) -> Dataset:
    """Read a headered CSV whose last column is ``label``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1].strip() != "label":
            raise ParseError("missing header row ending in a 'label' column", line=1)
        width = len(header)
        rows: List[List[float]] = []
        labels: List[int] = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} fields, found {len(row)}", line=line)
            try:
                values = [float(cell) for cell in row[:-1]]
            except ValueError as exc:
                raise ParseError(f"non-numeric cell ({exc})", line=line) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite value", line=line)
            try:
                label = int(row[-1])
            except ValueError:
                raise ParseError(f"label {row[-1]!r} is not an integer", line=line) from None
            if label < 0:
                raise ParseError(f"negative label {label}", line=line)
            rows.append(values)
            labels.append(label)
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    if n_classes is None:
        n_classes = max(labels) + 1
    elif max(labels) >= n_classes:
        raise ParseError(f"label {max(labels)} exceeds n_classes={n_classes}")
    return Dataset(np.array(rows, dtype=float), np.array(labels), n_classes)


def write_csv(ds: Dataset, path) -> None:
    """Write ``ds`` in the input format; floats use shortest round-trip repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join([f"f{j}" for j in range(ds.n_features)] + ["label"]) + "\n")
        for row, label in zip(ds.features, ds.labels):
            fh.write(",".join([repr(float(v)) for v in row] + [str(int(label))]) + "\n")


# --- Min-Max ----------------------------------------------------------------

def minmax_fit(features) -> Tuple[np.ndarray, np.ndarray]:
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptyDatasetError("cannot fit bounds on an empty feature matrix")
    return features.min(axis=0), features.max(axis=0)


def minmax_apply(features, bounds) -> np.ndarray:
    """Map to [0, 1] using fitted bounds; clamp; constant features map to 0."""
    lo, hi = bounds
    features = np.asarray(features, dtype=float)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (features - lo) / safe, 0.0)
    return np.clip(scaled, 0.0, 1.0)


# --- PCA --------------------------------------------------------------------

def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Pairs ``(p, q)`` are swept in row-major order, so the result is fully
    deterministic. Returns ``(eigenvalues, eigenvectors)`` with eigenvectors
    in columns, unsorted.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def _fix_signs(components: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry of each row is made positive (argmax takes the lowest index on ties).
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(len(components)), pivots])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def pca_fit(features, k: int, solver: str = "lapack") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-``k`` principal axes of the sample covariance.

    Returns ``(mean, components, explained_variance)``; ``components`` has
    orthonormal rows ordered by descending variance. ``solver`` is
    ``"lapack"`` (numpy.linalg.eigh) or ``"jacobi"``.
    """
    features = np.asarray(features, dtype=float)
    n, d = features.shape
    if n < 2:
        raise ConfigError("PCA needs at least 2 samples")
    if not 1 <= k <= min(n - 1, d):
        raise ConfigError(f"k={k} must lie in [1, min(n_samples - 1, n_features)] = [1, {min(n - 1, d)}]")
    mean = features.mean(axis=0)
    centered = features - mean
    cov = centered.T @ centered / (n - 1)
    if solver == "lapack":
        evals, evecs = np.linalg.eigh(cov)
    elif solver == "jacobi":
        evals, evecs = jacobi_eigh(cov)
    else:
        raise ConfigError(f"unknown PCA solver {solver!r}")
    order = np.argsort(-evals, kind="stable")[:k]
    return mean, _fix_signs(evecs[:, order].T.copy()), evals[order]


def pca_apply(features, mean, components) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != mean.shape[0]:
        raise ShapeError(f"expected {mean.shape[0]} features, got {features.shape[-1]}")
    return (features - mean) @ components.T


def angle_rescale_fit(projected) -> Tuple[np.ndarray, np.ndarray]:
    return minmax_fit(projected)


def angle_rescale_apply(projected, bounds) -> np.ndarray:
    return np.pi * minmax_apply(projected, bounds)


# --- full pipeline ----------------------------------------------------------

@dataclass
class PreprocessorModel:
    input_min: np.ndarray
    input_max: np.ndarray
    pca_mean: np.ndarray
    pca_components: np.ndarray
    post_min: np.ndarray
    post_max: np.ndarray

    @property
    def k(self) -> int:
        return self.pca_components.shape[0]

    @property
    def n_features(self) -> int:
        return self.input_min.shape[0]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n_features": self.n_features,
            "input_min": self.input_min.tolist(),
            "input_max": self.input_max.tolist(),
            "pca_mean": self.pca_mean.tolist(),
            "pca_components": self.pca_components.tolist(),
            "post_min": self.post_min.tolist(),
            "post_max": self.post_max.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessorModel":
        arrays = {
            key: np.array(d[key], dtype=float)
            for key in ("input_min", "input_max", "pca_mean", "pca_components", "post_min", "post_max")
        }
        model = cls(**arrays)
        if model.k != d["k"] or model.n_features != d["n_features"]:
            raise ShapeError("preprocessor arrays disagree with recorded k / n_features")
        return model

    def transform(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.n_features:
            raise ShapeError(
                f"preprocessor expects {self.n_features} raw features, found {features.shape[-1]}"
            )
        scaled = minmax_apply(features, (self.input_min, self.input_max))
        projected = pca_apply(scaled, self.pca_mean, self.pca_components)
        return angle_rescale_apply(projected, (self.post_min, self.post_max))


def preprocess_fit(train: Dataset, k: int, solver: str = "lapack") -> PreprocessorModel:
    lo, hi = minmax_fit(train.features)
    scaled = minmax_apply(train.features, (lo, hi))
    mean, components, _ = pca_fit(scaled, k, solver=solver)
    post_lo, post_hi = angle_rescale_fit(pca_apply(scaled, mean, components))
    return PreprocessorModel(lo, hi, mean, components, post_lo, post_hi)


def preprocess_apply(ds: Dataset, model: PreprocessorModel) -> Dataset:
    return Dataset(model.transform(ds.features), ds.labels.copy(), ds.n_classes)


# --- synthetic data and batching --------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int
    n_features: int
    samples_per_class: int
    separation: float
    seed: int

    def __post_init__(self):
        for name in ("n_classes", "n_features", "samples_per_class"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.separation > 0:
            raise ConfigError(f"separation must be positive, got {self.separation}")


def seed_sequence(*words: int) -> np.random.SeedSequence:
    """SeedSequence from arbitrary (possibly negative) 64-bit integers."""
    return np.random.SeedSequence([w & 0xFFFFFFFFFFFFFFFF for w in words])


def _box_muller(rng: np.random.Generator, count: int) -> np.ndarray:
    # Uniform pairs (u1, u2) in draw order give (r cos, r sin) in that order.
    pairs = (count + 1) // 2
    u = rng.random(2 * pairs).reshape(pairs, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    return np.stack([r * np.cos(angle), r * np.sin(angle)], axis=1).ravel()[:count]


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Isotropic unit-variance Gaussian blobs.

    Draw order from a PCG64 stream seeded by ``spec.seed``: first one
    ``n_features`` normal vector per class (normalized to a unit direction and
    scaled by ``separation`` to give the centroid), then the sample noise for
    class 0, class 1, ... row by row. Normals come from Box-Muller.
    """
    rng = np.random.Generator(np.random.PCG64(seed_sequence(spec.seed)))
    c, d, m = spec.n_classes, spec.n_features, spec.samples_per_class
    directions = _box_muller(rng, c * d).reshape(c, d)
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    centroids = spec.separation * directions / np.where(norms > 0, norms, 1.0)
    noise = _box_muller(rng, c * m * d).reshape(c, m, d)
    features = (centroids[:, None, :] + noise).reshape(c * m, d)
    labels = np.repeat(np.arange(c), m)
    return Dataset(features, labels, c)


def batches(n_samples: int, batch_size: int, seed: int, epoch: int) -> List[np.ndarray]:
    """Shuffled index batches for one epoch; the last batch may be short."""
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    n = n_samples if isinstance(n_samples, int) else len(n_samples)
    rng = np.random.Generator(np.random.PCG64(seed_sequence(seed, epoch)))
    order = rng.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def split_per_class(ds: Dataset, n_train: int) -> Tuple[Dataset, Dataset]:
    """First ``n_train`` samples of every class for training, the rest for testing."""
    train_idx, test_idx = [], []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])
    tr, te = np.concatenate(train_idx), np.concatenate(test_idx)
    return (
        Dataset(ds.features[tr], ds.labels[tr], ds.n_classes),
        Dataset(ds.features[te], ds.labels[te], ds.n_classes),
    )
