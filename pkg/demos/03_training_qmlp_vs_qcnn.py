# Training a hybrid classifier
#
# Raw features go through Min-Max scaling, PCA down to one component per qubit,
# and a rescale into [0, pi]. The circuit's expectations then feed a small
# linear softmax head. Everything is trained jointly with Adam.

from qmalsim import Architecture, SyntheticSpec, TrainConfig, generate_synthetic, run_experiment
from qmalsim.data import preprocess_apply, preprocess_fit, split_per_class

# Two Gaussian blobs in 16 dimensions, 100 training and 100 test points per class.

raw = generate_synthetic(SyntheticSpec(n_classes=2, n_features=16, samples_per_class=200, separation=6.0, seed=0))
train_raw, test_raw = split_per_class(raw, 100)

# The preprocessor is fitted on the training split only.

pre = preprocess_fit(train_raw, 4)
train_ds, test_ds = preprocess_apply(train_raw, pre), preprocess_apply(test_raw, pre)
print("angles range:", train_ds.features.min().round(3), "to", train_ds.features.max().round(3))

# Three independent runs per model, seeds 0, 1 and 2.

for kind in ("QMLP", "QCNN"):
    config = TrainConfig(Architecture(kind, 4), n_classes=2, epochs=10, batch_size=16, lr=0.01, seed=0, runs=3)
    result = run_experiment(config, train_ds, test_ds, preprocessor=pre)
    acc = result.aggregate["accuracy"]
    auc = result.aggregate["roc_auc"]
    losses = result.histories[result.best_run].losses
    print(f"{kind}: accuracy {100 * acc['mean']:.1f} ± {100 * acc['std']:.1f}  "
          f"ROC-AUC {100 * auc['mean']:.1f} ± {100 * auc['std']:.1f}  "
          f"loss {losses[0]:.3f} -> {losses[-1]:.3f}")

# At four qubits QCNN reads a single qubit, so its head sees one number per
# sample. That is plenty for two well separated classes but tight for more.
