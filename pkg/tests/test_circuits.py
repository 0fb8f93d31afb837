import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmalsim.circuits import (
    QCNN,
    QMLP,
    Architecture,
    ParameterVector,
    active_sets,
    build,
    build_qcnn,
    build_qmlp,
    forward,
    param_count,
    param_layout,
)
from qmalsim.errors import ConfigError, ShapeError
from qmalsim.simulator import dense_circuit, init_state


def dense_forward(arch, x, params):
    ops, measured = build(arch, x, params)
    amps = dense_circuit(ops, arch.n_qubits) @ init_state(arch.n_qubits).amplitudes
    probs = np.abs(amps) ** 2
    idx = np.arange(len(probs))
    return np.array([probs[(idx >> q) & 1 == 0].sum() - probs[(idx >> q) & 1 == 1].sum() for q in measured])


def test_param_counts():
    assert param_count(Architecture(QMLP, 16, 2)) == 128
    assert param_count(Architecture(QCNN, 16)) == 96
    assert param_count(Architecture(QMLP, 2, 1)) == 8


def test_layout_is_contiguous_and_complete():
    for arch in [Architecture(QMLP, 5, 3), Architecture(QCNN, 8)]:
        layout = param_layout(arch)
        offset = 0
        for seg in layout:
            assert seg.offset == offset
            offset += seg.length
        assert offset == param_count(arch)


def test_qcnn_layout_order():
    names = [(s.name, s.length) for s in param_layout(Architecture(QCNN, 16))]
    assert names == [("conv1.rot", 48), ("conv1.crx", 16), ("conv2.rot", 24), ("conv2.crx", 8)]


@pytest.mark.parametrize(
    "kind,n,layers",
    [(QMLP, 1, 2), (QMLP, 4, 0), (QCNN, 6, 2), (QCNN, 2, 2), (QCNN, 8, 3), ("QRNN", 4, 2)],
)
def test_invalid_architectures(kind, n, layers):
    with pytest.raises(ConfigError):
        Architecture(kind, n, layers)


def test_qmlp_two_qubit_one_layer_unrolled():
    arch = Architecture(QMLP, 2, 1)
    ops, measured = build_qmlp(arch, [0.1, 0.2], np.arange(8, dtype=float))
    got = [(op.kind, op.control, op.target) for op in ops]
    assert got == [
        ("RX", None, 0), ("RX", None, 1),
        ("ROT", None, 0), ("ROT", None, 1),
        ("CRX", 0, 1), ("CRX", 1, 0),
    ]
    assert [float(a) for a in ops[2].angles] == [0, 1, 2]
    assert [float(a) for a in ops[3].angles] == [3, 4, 5]
    assert float(ops[4].angles[0]) == 6 and float(ops[5].angles[0]) == 7
    assert measured == [0, 1]


def test_qmlp_identity_circuit():
    arch = Architecture(QMLP, 4)
    np.testing.assert_allclose(forward(arch, np.zeros(4), np.zeros(32)), np.ones(4), atol=1e-15)


def test_qmlp_half_pi_reuploaded_twice_flips():
    arch = Architecture(QMLP, 3, 2)
    out = forward(arch, np.full(3, np.pi / 2), np.zeros(param_count(arch)))
    np.testing.assert_allclose(out, -np.ones(3), atol=1e-12)


def test_qmlp_two_qubit_periodicity():
    x = [np.pi, 0.0]
    np.testing.assert_allclose(forward(Architecture(QMLP, 2, 2), x, np.zeros(16)), [1, 1], atol=1e-12)
    np.testing.assert_allclose(forward(Architecture(QMLP, 2, 1), x, np.zeros(8)), [-1, 1], atol=1e-12)


def test_qcnn_active_sets_at_sixteen():
    a1, a2, a3 = active_sets(Architecture(QCNN, 16))
    assert a2 == [0, 2, 4, 6, 8, 10, 12, 14]
    assert a3 == [0, 4, 8, 12]
    assert set(a3) < set(a2) < set(a1)
    _, measured = build_qcnn(Architecture(QCNN, 16), np.zeros(16), np.zeros(96))
    assert measured == [0, 4, 8, 12]


def test_qcnn_embedding_and_rings():
    arch = Architecture(QCNN, 4)
    ops, _ = build_qcnn(arch, [0.1, 0.2, 0.3, 0.4], np.zeros(24))
    assert [op.kind for op in ops[:3]] == ["RX", "RY", "RZ"]
    assert all(float(op.angles[0]) == 0.1 for op in ops[:3])
    crx = [(op.control, op.target) for op in ops if op.kind == "CRX"]
    assert crx == [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (2, 0)]


def test_qcnn_identity_circuit():
    arch = Architecture(QCNN, 8)
    np.testing.assert_allclose(forward(arch, np.zeros(8), np.zeros(48)), [1, 1], atol=1e-15)


@pytest.mark.parametrize("arch", [Architecture(QCNN, 4), Architecture(QMLP, 4), Architecture(QCNN, 8)])
def test_forward_matches_dense_oracle(arch):
    rng = np.random.default_rng(11)
    for _ in range(3):
        x = rng.uniform(0, np.pi, arch.n_qubits)
        p = rng.uniform(0, 2 * np.pi, param_count(arch))
        np.testing.assert_allclose(forward(arch, x, p), dense_forward(arch, x, p), atol=1e-12, rtol=0)


def test_forward_batch_rows_are_independent():
    arch = Architecture(QMLP, 3)
    rng = np.random.default_rng(12)
    xs = rng.uniform(0, np.pi, (5, 3))
    ps = rng.uniform(0, 2 * np.pi, (5, param_count(arch)))
    batched = forward(arch, xs, ps)
    for i in range(5):
        np.testing.assert_allclose(batched[i], forward(arch, xs[i], ps[i]), atol=1e-15)


def test_shape_errors():
    arch = Architecture(QMLP, 3)
    with pytest.raises(ShapeError):
        forward(arch, np.zeros(4), np.zeros(param_count(arch)))
    with pytest.raises(ShapeError):
        forward(arch, np.zeros(3), np.zeros(5))
    with pytest.raises(ShapeError):
        ParameterVector.for_arch(arch, np.zeros(3))


def test_build_is_deterministic():
    arch = Architecture(QCNN, 8)
    rng = np.random.default_rng(13)
    x, p = rng.uniform(0, 3, 8), rng.uniform(0, 6, 48)
    a, _ = build(arch, x, p)
    b, _ = build(arch, x.copy(), p.copy())
    assert len(a) == len(b)
    for oa, ob in zip(a, b):
        assert (oa.kind, oa.control, oa.target) == (ob.kind, ob.control, ob.target)
        assert [float(v) for v in oa.angles] == [float(v) for v in ob.angles]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(-2, 2), kind=st.sampled_from([QMLP, QCNN]))
def test_output_bounds_and_input_periodicity(seed, k, kind):
    arch = Architecture(kind, 4)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-np.pi, np.pi, 4)
    p = rng.uniform(0, 2 * np.pi, param_count(arch))
    out = forward(arch, x, p)
    assert np.all(np.abs(out) <= 1 + 1e-12)
    np.testing.assert_allclose(forward(arch, x + 4 * np.pi * k, p), out, atol=1e-10)
