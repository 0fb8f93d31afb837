"""Parameter-shift gradients, a finite-difference oracle, and the hybrid chain rule.

Rot components are single-axis rotations (generator eigenvalues +-1/2) and use
the two-term rule. CRX has generator eigenvalues {0, +-1/2} and needs the
four-term rule with shifts pi/2 and 3pi/2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuits import FOUR_TERM, TWO_TERM, Architecture, ParameterVector, forward, param_layout
from .errors import ShapeError

__all__ = [
    "C_PLUS",
    "C_MINUS",
    "Jacobian",
    "shift_grad_single",
    "shift_plan",
    "evaluations_per_gradient",
    "quantum_jacobian",
    "batch_jacobian",
    "fd_jacobian",
    "hybrid_backward",
]

C_PLUS = (np.sqrt(2) + 1) / (4 * np.sqrt(2))
C_MINUS = (np.sqrt(2) - 1) / (4 * np.sqrt(2))

_HALF_PI = np.pi / 2
_THREE_HALF_PI = 3 * np.pi / 2


@dataclass
class Jacobian:
    matrix: np.ndarray  # (n_outputs, n_params)
    n_evaluations: int


def shift_grad_single(
    evaluate: Callable[[np.ndarray], np.ndarray],
    base,
    index: int,
    kind: str = TWO_TERM,
) -> np.ndarray:
    """d evaluate / d theta_index by the two- or four-term shift rule."""
    theta = base.values if isinstance(base, ParameterVector) else np.asarray(base, dtype=float)
    if not 0 <= index < theta.shape[-1]:
        raise IndexError(f"parameter index {index} out of range for {theta.shape[-1]} parameters")

    def at(shift):
        shifted = theta.copy()
        shifted[index] += shift
        return np.asarray(evaluate(shifted), dtype=float)

    if kind == TWO_TERM:
        return (at(_HALF_PI) - at(-_HALF_PI)) / 2
    if kind == FOUR_TERM:
        return C_PLUS * (at(_HALF_PI) - at(-_HALF_PI)) - C_MINUS * (
            at(_THREE_HALF_PI) - at(-_THREE_HALF_PI)
        )
    raise ValueError(f"unknown shift kind {kind!r}")


def shift_plan(arch: Architecture):
    """Shift table for one full Jacobian.

    Returns ``(columns, shifts, weights)``: evaluation ``r`` perturbs parameter
    ``columns[r]`` by ``shifts[r]`` and contributes ``weights[r] * f`` to that
    column. Rows are ordered by parameter, so the reduction order is fixed.
    """
    columns, shifts, weights = [], [], []
    for seg in param_layout(arch):
        for j in range(seg.offset, seg.offset + seg.length):
            if seg.shift == TWO_TERM:
                terms = ((_HALF_PI, 0.5), (-_HALF_PI, -0.5))
            else:
                terms = (
                    (_HALF_PI, C_PLUS),
                    (-_HALF_PI, -C_PLUS),
                    (_THREE_HALF_PI, -C_MINUS),
                    (-_THREE_HALF_PI, C_MINUS),
                )
            for shift, weight in terms:
                columns.append(j)
                shifts.append(shift)
                weights.append(weight)
    return np.array(columns), np.array(shifts), np.array(weights)


def evaluations_per_gradient(arch: Architecture) -> int:
    """Circuit evaluations for one parameter-shift Jacobian of one sample."""
    return len(shift_plan(arch)[0])


def _values(params) -> np.ndarray:
    return params.values if isinstance(params, ParameterVector) else np.asarray(params, dtype=float)


def _reduce(outputs: np.ndarray, columns: np.ndarray, weights: np.ndarray, n_params: int) -> np.ndarray:
    # outputs: (R, n_out). Deterministic scatter-add in row order.
    jac = np.zeros((outputs.shape[-1], n_params))
    np.add.at(jac.T, columns, weights[:, None] * outputs)
    return jac


def quantum_jacobian(arch: Architecture, x, params) -> Jacobian:
    """Parameter-shift Jacobian d<Z>/d theta for one sample.

    All shifted circuits are simulated as one batch; the number of rows is
    ``2 * #two-term + 4 * #four-term``.
    """
    theta = _values(params)
    columns, shifts, weights = shift_plan(arch)
    rows = np.tile(theta, (len(columns), 1))
    rows[np.arange(len(columns)), columns] += shifts
    outputs = forward(arch, x, rows)
    return Jacobian(_reduce(outputs, columns, weights, theta.shape[-1]), len(columns))


def batch_jacobian(arch: Architecture, xs, params, max_rows: int | None = None) -> np.ndarray:
    """Stacked Jacobians for a batch of samples, shape ``(S, n_out, P)``.

    Samples are grouped so one simulator call holds at most ``max_rows``
    circuits (default keeps a call near 64 MiB of amplitudes). Grouping only
    depends on the shapes, never on threading.
    """
    xs = np.asarray(xs, dtype=float)
    theta = _values(params)
    columns, shifts, weights = shift_plan(arch)
    r = len(columns)
    if max_rows is None:
        max_rows = max(r, (64 << 20) // (16 << arch.n_qubits))
    per_call = max(1, max_rows // r)
    out = np.empty((xs.shape[0], arch.n_outputs, theta.shape[-1]))
    rows = np.tile(theta, (r, 1))
    rows[np.arange(r), columns] += shifts
    for start in range(0, xs.shape[0], per_call):
        chunk = xs[start:start + per_call]
        k = chunk.shape[0]
        outputs = forward(arch, np.repeat(chunk, r, axis=0), np.tile(rows, (k, 1)))
        outputs = outputs.reshape(k, r, -1)
        for i in range(k):
            out[start + i] = _reduce(outputs[i], columns, weights, theta.shape[-1])
    return out


def fd_jacobian(arch: Architecture, x, params, h: float = 1e-5) -> Jacobian:
    """Central finite differences, one column per parameter."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"finite-difference step must lie in [1e-7, 1e-3], got {h}")
    theta = _values(params)
    p = theta.shape[-1]
    rows = np.tile(theta, (2 * p, 1))
    idx = np.arange(p)
    rows[2 * idx, idx] += h
    rows[2 * idx + 1, idx] -= h
    outputs = forward(arch, x, rows)
    jac = (outputs[0::2] - outputs[1::2]).T / (2 * h)
    return Jacobian(jac, 2 * p)


def hybrid_backward(jac, upstream) -> np.ndarray:
    """dLoss/dtheta = J^T . dLoss/dz."""
    matrix = jac.matrix if isinstance(jac, Jacobian) else np.asarray(jac)
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != matrix.shape[:1]:
        raise ShapeError(f"upstream has shape {upstream.shape}; jacobian has {matrix.shape[0]} outputs")
    return matrix.T @ upstream
