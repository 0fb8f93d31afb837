import numpy as np
import pytest

from qmalsim.data import SyntheticSpec, generate_synthetic, preprocess_apply, preprocess_fit, split_per_class


def synthetic_split(n_classes, per_class_train, per_class_test, qubits=4, separation=6.0, seed=0, features=16):
    ds = generate_synthetic(
        SyntheticSpec(n_classes, features, per_class_train + per_class_test, separation, seed)
    )
    train, test = split_per_class(ds, per_class_train)
    pre = preprocess_fit(train, qubits)
    return preprocess_apply(train, pre), preprocess_apply(test, pre), pre


@pytest.fixture(scope="session")
def small_binary():
    """40 + 40 training angles on 4 qubits, 20 + 20 test."""
    return synthetic_split(2, 40, 20)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
