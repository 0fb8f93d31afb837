"""Hybrid quantum-classical malware classifiers (QMLP and QCNN) on a numpy statevector simulator."""
from .circuits import QCNN, QMLP, Architecture, ParameterVector, forward, param_count
from .data import Dataset, PreprocessorModel, SyntheticSpec, generate_synthetic, load_csv
from .metrics import MetricsReport
from .training import HybridModel, TrainConfig, evaluate, load_model, run_experiment, save_model, train

__version__ = "0.1.0"
