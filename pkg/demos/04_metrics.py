# Metrics
#
# All classification metrics are one-vs-rest per class and then averaged with
# equal weight. A zero denominator gives 0, and that class still counts.

from qmalsim.metrics import MetricsReport, aggregate_runs, confusion, roc_auc, scalar_metrics

labels = [1, 0, 0, 1]
preds = [1, 0, 1, 1]
cm = confusion(labels, preds, 2)
print("confusion (rows true, columns predicted):", cm.counts.tolist())

report = scalar_metrics(cm)
for name, value in report.scalars().items():
    if value is not None:
        print(f"  {name:16s} {value:.4f}")
print("  per-class precision", report.per_class["precision"])

# ROC-AUC is the Mann-Whitney statistic: the share of (positive, negative)
# pairs ranked correctly, with ties worth half.

print("AUC, one swapped pair:", roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]))
print("AUC, all tied:", roc_auc([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5]))

# Runs are summarised by mean and sample standard deviation.

runs = [MetricsReport(a, 0, 0, 0, 0, 0) for a in (0.8, 1.0)]
acc = aggregate_runs(runs)["accuracy"]
print(f"accuracy over two runs: {acc['mean']:.4f} ± {acc['std']:.4f}")
