"""QMLP and QCNN circuit families.

QMLP (per layer, repeated ``n_layers`` times with fresh parameters)::

    RX(x_i) on every qubit -> Rot on every qubit -> CRX ring i -> (i+1) mod n

and measures <Z> on every qubit.

QCNN::

    RX(x_i) RY(x_i) RZ(x_i) on every qubit
    conv1: Rot + CRX ring on all n qubits;    pool -> every 2nd active qubit
    conv2: Rot + CRX ring on n/2 qubits;      pool -> every 2nd active qubit

and measures <Z> on the remaining n/4 qubits (0, 4, 8, 12 for n=16).
Pooled-out qubits are simply left alone; nothing is measured mid-circuit.

Parameter layout is frozen (saved models depend on it): for each stage, the
Rot angles ``(phi, theta, omega)`` of every active qubit in ascending order,
followed by one CRX angle per ring edge in ascending control order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, ShapeError
from .simulator import GateOp, init_state, run, z_expectation

__all__ = [
    "QMLP",
    "QCNN",
    "TWO_TERM",
    "FOUR_TERM",
    "Architecture",
    "Segment",
    "ParameterVector",
    "param_count",
    "param_layout",
    "init_params",
    "active_sets",
    "build_qmlp",
    "build_qcnn",
    "build",
    "forward",
]

QMLP = "QMLP"
QCNN = "QCNN"
TWO_TERM = "TWO_TERM"
FOUR_TERM = "FOUR_TERM"


@dataclass(frozen=True)
class Architecture:
    kind: str
    n_qubits: int
    n_layers: int = 2

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind == QMLP:
            if self.n_qubits < 2:
                raise ConfigError(f"QMLP needs at least 2 qubits for its CRX ring, got {self.n_qubits}")
            if self.n_layers < 1:
                raise ConfigError(f"QMLP needs at least 1 layer, got {self.n_layers}")
        elif kind == QCNN:
            if self.n_qubits < 4 or self.n_qubits % 4:
                raise ConfigError(
                    f"QCNN qubit count must be a positive multiple of 4, got {self.n_qubits}"
                )
            if self.n_layers != 2:
                raise ConfigError(f"QCNN has exactly 2 conv/pool stages, got n_layers={self.n_layers}")
        else:
            raise ConfigError(f"unknown architecture {self.kind!r}; expected QMLP or QCNN")

    @property
    def n_outputs(self) -> int:
        return self.n_qubits if self.kind == QMLP else self.n_qubits // 4


@dataclass(frozen=True)
class Segment:
    name: str
    offset: int
    length: int
    shift: str

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.length)


def active_sets(arch: Architecture) -> List[List[int]]:
    """Active qubits per stage: one entry for QMLP, [A1, A2, A3] for QCNN."""
    a1 = list(range(arch.n_qubits))
    if arch.kind == QMLP:
        return [a1]
    a2 = a1[::2]
    return [a1, a2, a2[::2]]


def _stages(arch: Architecture) -> List[Tuple[str, List[int]]]:
    if arch.kind == QMLP:
        qubits = list(range(arch.n_qubits))
        return [(f"layer{l}", qubits) for l in range(arch.n_layers)]
    a1, a2, _ = active_sets(arch)
    return [("conv1", a1), ("conv2", a2)]


def param_layout(arch: Architecture) -> Tuple[Segment, ...]:
    segments = []
    offset = 0
    for name, qubits in _stages(arch):
        for suffix, length, shift in (
            ("rot", 3 * len(qubits), TWO_TERM),
            ("crx", len(qubits), FOUR_TERM),
        ):
            segments.append(Segment(f"{name}.{suffix}", offset, length, shift))
            offset += length
    return tuple(segments)


def param_count(arch: Architecture) -> int:
    return sum(seg.length for seg in param_layout(arch))


@dataclass
class ParameterVector:
    values: np.ndarray
    layout: Tuple[Segment, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = sum(seg.length for seg in self.layout)
        if self.values.shape[-1] != expected:
            raise ShapeError(f"parameter vector has {self.values.shape[-1]} entries, layout needs {expected}")

    @classmethod
    def for_arch(cls, arch: Architecture, values) -> "ParameterVector":
        return cls(values, param_layout(arch))

    def segment(self, name: str) -> np.ndarray:
        for seg in self.layout:
            if seg.name == name:
                return self.values[..., seg.slice]
        raise KeyError(name)

    def shift_kinds(self) -> List[str]:
        """Shift rule of every parameter position, in layout order."""
        kinds: List[str] = []
        for seg in self.layout:
            kinds.extend([seg.shift] * seg.length)
        return kinds

    def __len__(self) -> int:
        return self.values.shape[-1]


def init_params(arch: Architecture, rng: np.random.Generator) -> ParameterVector:
    """Uniform angles in [0, 2pi)."""
    return ParameterVector.for_arch(arch, rng.uniform(0.0, 2 * np.pi, size=param_count(arch)))


def _as_values(arch: Architecture, params) -> np.ndarray:
    values = params.values if isinstance(params, ParameterVector) else np.asarray(params, dtype=float)
    if values.shape[-1] != param_count(arch):
        raise ShapeError(
            f"{arch.kind} on {arch.n_qubits} qubits needs {param_count(arch)} parameters, "
            f"got {values.shape[-1]}"
        )
    return values


def _as_features(arch: Architecture, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != arch.n_qubits:
        raise ShapeError(f"expected {arch.n_qubits} features, got shape {x.shape}")
    return x


def _trainable_stage(ops: List[GateOp], qubits: Sequence[int], rot: np.ndarray, crx: np.ndarray) -> None:
    for j, q in enumerate(qubits):
        ops.append(GateOp("ROT", q, (rot[..., 3 * j], rot[..., 3 * j + 1], rot[..., 3 * j + 2])))
    m = len(qubits)
    for j in range(m):
        ops.append(GateOp("CRX", qubits[(j + 1) % m], (crx[..., j],), control=qubits[j]))


def build_qmlp(arch: Architecture, x, params) -> Tuple[List[GateOp], List[int]]:
    x = _as_features(arch, x)
    values = _as_values(arch, params)
    layout = param_layout(arch)
    ops: List[GateOp] = []
    for layer in range(arch.n_layers):
        rot, crx = layout[2 * layer], layout[2 * layer + 1]
        for q in range(arch.n_qubits):
            ops.append(GateOp("RX", q, (x[..., q],)))
        _trainable_stage(ops, range(arch.n_qubits), values[..., rot.slice], values[..., crx.slice])
    return ops, list(range(arch.n_qubits))


def build_qcnn(arch: Architecture, x, params) -> Tuple[List[GateOp], List[int]]:
    x = _as_features(arch, x)
    values = _as_values(arch, params)
    layout = param_layout(arch)
    a1, a2, a3 = active_sets(arch)
    ops: List[GateOp] = []
    for q in range(arch.n_qubits):
        for kind in ("RX", "RY", "RZ"):
            ops.append(GateOp(kind, q, (x[..., q],)))
    for stage, qubits in enumerate((a1, a2)):
        rot, crx = layout[2 * stage], layout[2 * stage + 1]
        _trainable_stage(ops, qubits, values[..., rot.slice], values[..., crx.slice])
    return ops, a3


def build(arch: Architecture, x, params) -> Tuple[List[GateOp], List[int]]:
    if arch.kind == QMLP:
        return build_qmlp(arch, x, params)
    return build_qcnn(arch, x, params)


def forward(arch: Architecture, x, params) -> np.ndarray:
    """Pauli-Z expectations of the measured qubits, ascending qubit order.

    ``x`` may be ``(n_qubits,)`` or ``(B, n_qubits)`` and the parameters
    ``(P,)`` or ``(B, P)``; leading dimensions broadcast and every row is an
    independent circuit. Returns shape ``batch + (n_outputs,)``.
    """
    x = _as_features(arch, x)
    values = _as_values(arch, params)
    batch = np.broadcast_shapes(x.shape[:-1], values.shape[:-1])
    if len(batch) > 1:
        raise ShapeError(f"at most one batch dimension is supported, got {batch}")
    if batch:
        x = np.broadcast_to(x, batch + x.shape[-1:])
        values = np.broadcast_to(values, batch + values.shape[-1:])
    ops, measured = build(arch, x, values)
    state = init_state(arch.n_qubits, batch=batch[0] if batch else None)
    run(state, ops)
    return np.stack([np.asarray(z_expectation(state, q)) for q in measured], axis=-1)
