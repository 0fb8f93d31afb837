"""Classical head: linear layer + log-softmax + NLL, and Adam."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TrainingError

__all__ = [
    "LinearHead",
    "AdamState",
    "init_head",
    "head_forward",
    "log_softmax",
    "nll_loss",
    "head_backward",
    "adam_step",
]


@dataclass
class LinearHead:
    weights: np.ndarray  # (n_classes, n_inputs)
    bias: np.ndarray  # (n_classes,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 2 or self.bias.shape != self.weights.shape[:1]:
            raise ShapeError(f"weights {self.weights.shape} and bias {self.bias.shape} disagree")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.weights.shape[1]

    @property
    def size(self) -> int:
        return self.weights.size + self.bias.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.weights.ravel(), self.bias])

    @classmethod
    def from_flat(cls, flat, n_classes: int, n_inputs: int) -> "LinearHead":
        flat = np.asarray(flat, dtype=float)
        k = n_classes * n_inputs
        return cls(flat[:k].reshape(n_classes, n_inputs).copy(), flat[k:].copy())


def init_head(n_classes: int, n_inputs: int, rng: np.random.Generator) -> LinearHead:
    """Fan-in uniform weights in [-1/sqrt(n_inputs), 1/sqrt(n_inputs)], zero bias."""
    bound = 1.0 / np.sqrt(n_inputs)
    return LinearHead(rng.uniform(-bound, bound, size=(n_classes, n_inputs)), np.zeros(n_classes))


def log_softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=float)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def head_forward(z, head: LinearHead) -> np.ndarray:
    """Log-probabilities for ``z`` of shape ``(n_inputs,)`` or ``(B, n_inputs)``."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != head.n_inputs:
        raise ShapeError(f"head expects {head.n_inputs} inputs, got {z.shape[-1]}")
    return log_softmax(z @ head.weights.T + head.bias)


def _check_labels(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise IndexError(f"labels must lie in [0, {n_classes}), got range [{labels.min()}, {labels.max()}]")
    return labels.astype(int)


def nll_loss(logp, labels) -> float:
    """Mean of -logp[i, labels[i]] over the batch."""
    logp = np.atleast_2d(np.asarray(logp, dtype=float))
    labels = _check_labels(np.atleast_1d(labels), logp.shape[1])
    if labels.shape[0] != logp.shape[0]:
        raise ShapeError(f"{logp.shape[0]} rows but {labels.shape[0]} labels")
    return float(-logp[np.arange(len(labels)), labels].mean())


def head_backward(z, head: LinearHead, labels):
    """Gradients of the batch-mean NLL: ``(dW, db, dz)``.

    ``dz`` has one row per sample and is what gets pushed through the
    quantum Jacobian.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    labels = _check_labels(np.atleast_1d(labels), head.n_classes)
    if labels.shape[0] != z.shape[0]:
        raise ShapeError(f"{z.shape[0]} rows but {labels.shape[0]} labels")
    p = np.exp(head_forward(z, head))
    dlogits = p
    dlogits[np.arange(len(labels)), labels] -= 1.0
    dlogits /= len(labels)
    return dlogits.T @ z, dlogits.sum(axis=0), dlogits @ head.weights


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, n: int, **hyper) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), **hyper)


def adam_step(params, grads, state: AdamState):
    """One bias-corrected Adam update. Returns ``(new_params, state)``."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ShapeError(f"params {params.shape}, grads {grads.shape}, state {state.m.shape} disagree")
    bad = np.flatnonzero(~np.isfinite(grads))
    if bad.size:
        raise TrainingError(f"non-finite gradient at parameter index {bad[0]}")
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads * grads
    m_hat = state.m / (1 - state.beta1 ** state.t)
    v_hat = state.v / (1 - state.beta2 ** state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon), state
