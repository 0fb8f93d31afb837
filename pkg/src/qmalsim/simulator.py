"""Dense statevector simulation for the RX/RY/RZ/Rot/CRX gate set.

Qubit ``q`` is bit ``q`` of the basis-state index (little-endian), so on two
qubits the amplitude order is ``|q1 q0> = 00, 01, 10, 11``.

Every kernel works on a *batch* of states at once: ``amplitudes`` has shape
``(2**n,)`` for a single state or ``(B, 2**n)`` for ``B`` independent states.
Gate angles may be Python floats or arrays of shape ``(B,)``, one angle per
state in the batch. This is what makes parameter-shift gradients cheap: all
shifted circuits for a sample are simulated as one batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "MAX_QUBITS",
    "GATE_KINDS",
    "Statevector",
    "GateOp",
    "init_state",
    "apply_rotation",
    "apply_rot",
    "apply_crx",
    "apply_op",
    "z_expectation",
    "run",
    "gate_matrix",
    "dense_operator",
]

MAX_QUBITS = 24
GATE_KINDS = ("RX", "RY", "RZ", "ROT", "CRX")

Angle = Union[float, np.ndarray]


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape[-1] != 1 << self.n_qubits:
            raise ValueError(
                f"{self.amplitudes.shape[-1]} amplitudes do not describe {self.n_qubits} qubits"
            )

    @property
    def batch_shape(self) -> tuple:
        return self.amplitudes.shape[:-1]

    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.amplitudes, axis=-1)

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class GateOp:
    """One gate. ``angles`` holds 1 value (3 for ROT: phi, theta, omega)."""

    kind: str
    target: int
    angles: tuple = field(default=())
    control: Optional[int] = None

    def validate(self, n_qubits: int) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 3 if self.kind == "ROT" else 1
        if len(self.angles) != want:
            raise ValueError(f"{self.kind} takes {want} angle(s), got {len(self.angles)}")
        _check_qubit(self.target, n_qubits)
        if self.kind == "CRX":
            if self.control is None:
                raise IndexError("CRX requires a control qubit")
            _check_qubit(self.control, n_qubits)
            if self.control == self.target:
                raise IndexError(f"control and target are both qubit {self.target}")
        elif self.control is not None:
            raise IndexError(f"{self.kind} does not take a control qubit")


def _check_qubit(q: int, n_qubits: int) -> None:
    if not 0 <= q < n_qubits:
        raise IndexError(f"qubit index {q} out of range for {n_qubits} qubits")


def init_state(n_qubits: int, batch: Optional[int] = None) -> Statevector:
    """All-zeros basis state, optionally replicated ``batch`` times."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise MemoryError(f"n_qubits must lie in [1, {MAX_QUBITS}], got {n_qubits}")
    shape = (1 << n_qubits,) if batch is None else (batch, 1 << n_qubits)
    amps = np.zeros(shape, dtype=np.complex128)
    amps[..., 0] = 1.0
    return Statevector(n_qubits, amps)


def _coef(value, ndim: int) -> np.ndarray:
    # Reshape a per-state coefficient so it broadcasts over the qubit axes.
    value = np.asarray(value)
    if value.ndim == 0:
        return value
    return value.reshape(value.shape + (1,) * ndim)


def _apply_2x2(state: Statevector, target: int, u, control: Optional[int] = None) -> Statevector:
    """Apply ``u = ((u00, u01), (u10, u11))`` to ``target`` in place.

    The amplitude array is viewed as ``batch + (2,)*n`` where qubit ``q`` is
    axis ``n - 1 - q`` of the qubit block. With a control, only the slab whose
    control bit is 1 is touched.
    """
    n = state.n_qubits
    nb = state.amplitudes.ndim - 1
    psi = state.amplitudes.reshape(state.batch_shape + (2,) * n)
    lead = (slice(None),) * nb
    idx = [slice(None)] * n
    if control is not None:
        idx[n - 1 - control] = 1
    idx0 = list(idx)
    idx1 = list(idx)
    idx0[n - 1 - target] = 0
    idx1[n - 1 - target] = 1
    idx0 = lead + tuple(idx0)
    idx1 = lead + tuple(idx1)
    a0 = psi[idx0].copy()
    a1 = psi[idx1]
    rest = n - 1 - (control is not None)
    (u00, u01), (u10, u11) = [[_coef(v, rest) for v in row] for row in u]
    psi[idx0] = u00 * a0 + u01 * a1
    psi[idx1] = u10 * a0 + u11 * a1
    return state


def gate_matrix(kind: str, *angles) -> np.ndarray:
    """The 2x2 matrix of a single-qubit gate (the RX block for CRX).

    Scalar angles give shape ``(2, 2)``; batched angles give ``(2, 2, B)``.
    """
    if kind == "ROT":
        phi, theta, omega = (np.asarray(a, dtype=float) for a in angles)
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        return np.array([
            [np.exp(-0.5j * (phi + omega)) * c, -np.exp(0.5j * (phi - omega)) * s],
            [np.exp(-0.5j * (phi - omega)) * s, np.exp(0.5j * (phi + omega)) * c],
        ])
    (theta,) = angles
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind in ("RX", "CRX"):
        return np.array([[c + 0j, -1j * s], [-1j * s, c + 0j]])
    if kind == "RY":
        return np.array([[c + 0j, -s + 0j], [s + 0j, c + 0j]])
    if kind == "RZ":
        zero = np.zeros_like(c) + 0j
        return np.array([[np.exp(-0.5j * theta), zero], [zero, np.exp(0.5j * theta)]])
    raise ValueError(f"unknown gate kind {kind!r}")


def apply_rotation(state: Statevector, axis: str, qubit: int, theta: Angle) -> Statevector:
    """Apply exp(-i theta P / 2) for P in {X, Y, Z}."""
    _check_qubit(qubit, state.n_qubits)
    axis = axis.upper()
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"rotation axis must be X, Y or Z, got {axis!r}")
    return _apply_2x2(state, qubit, gate_matrix("R" + axis, theta))


def apply_rot(state: Statevector, qubit: int, phi: Angle, theta: Angle, omega: Angle) -> Statevector:
    """Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi)."""
    _check_qubit(qubit, state.n_qubits)
    return _apply_2x2(state, qubit, gate_matrix("ROT", phi, theta, omega))


def apply_crx(state: Statevector, control: int, target: int, theta: Angle) -> Statevector:
    _check_qubit(control, state.n_qubits)
    _check_qubit(target, state.n_qubits)
    if control == target:
        raise IndexError(f"control and target are both qubit {target}")
    return _apply_2x2(state, target, gate_matrix("RX", theta), control=control)


def apply_op(state: Statevector, op: GateOp) -> Statevector:
    if op.kind == "ROT":
        return apply_rot(state, op.target, *op.angles)
    if op.kind == "CRX":
        return apply_crx(state, op.control, op.target, op.angles[0])
    return apply_rotation(state, op.kind[1], op.target, op.angles[0])


def z_expectation(state: Statevector, qubit: int) -> Union[float, np.ndarray]:
    """<Z_qubit>: weight on bit value 0 minus weight on bit value 1."""
    n = state.n_qubits
    _check_qubit(qubit, n)
    probs = (state.amplitudes.real ** 2 + state.amplitudes.imag ** 2).reshape(
        state.batch_shape + (1 << (n - 1 - qubit), 2, 1 << qubit)
    )
    p0 = probs[..., 0, :].sum(axis=(-2, -1))
    p1 = probs[..., 1, :].sum(axis=(-2, -1))
    out = p0 - p1
    return float(out) if out.ndim == 0 else out


def run(state: Statevector, ops: Iterable[GateOp]) -> Statevector:
    """Apply ``ops`` in order. All ops are validated before any is applied."""
    ops = list(ops)
    for op in ops:
        op.validate(state.n_qubits)
    for op in ops:
        apply_op(state, op)
    return state


# --- dense oracle -----------------------------------------------------------

def _embed(u: np.ndarray, n_qubits: int, target: int) -> np.ndarray:
    # Kronecker order is most-significant qubit first.
    mats = [u if q == target else np.eye(2) for q in reversed(range(n_qubits))]
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_operator(op: GateOp, n_qubits: int) -> np.ndarray:
    """Full ``2**n x 2**n`` matrix of ``op`` built from Kronecker products.

    Test oracle only; angles must be scalars.
    """
    op.validate(n_qubits)
    u = gate_matrix(op.kind, *op.angles)
    if op.kind != "CRX":
        return _embed(u, n_qubits, op.target)
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    return _embed(p0, n_qubits, op.control) + _embed(p1, n_qubits, op.control) @ _embed(
        u, n_qubits, op.target
    )


def dense_circuit(ops: Sequence[GateOp], n_qubits: int) -> np.ndarray:
    mat = np.eye(1 << n_qubits, dtype=complex)
    for op in ops:
        mat = dense_operator(op, n_qubits) @ mat
    return mat
