"""Quantum classifier on the wine dataset with tuned initializations.

The pipeline: stratified train/test split, PCA down to four features,
min-max scaling into [0, pi], angle embedding into a strongly
entangling circuit, then cross-entropy training. Initial circuit
parameters come either from a tuned Beta distribution (s1/s2/s3) or
from the fixed manual baseline.
"""
from pathlib import Path

from qinitopt.cli import cmd_qml, resolve_config

here = Path(__file__).resolve().parent.parent
cfg = resolve_config(
    "qml",
    overrides=(f"dataset={here / 'datasets' / 'wine.csv'}",
               "es.n_iters=5", "train.iters=60"),
    seed=1)
record = cmd_qml(cfg)

results = record["results"]
print(f"dataset: {results['dataset']} "
      f"({results['n_train']} train / {results['n_test']} test, "
      f"{results['num_classes']} classes)")
print(f"\n{'method':>8} {'alpha':>8} {'beta':>8} {'loss(0)':>9} "
      f"{'loss(end)':>10} {'train acc':>10} {'test acc':>9}")
for method, entry in results["methods"].items():
    a, b = entry["hyperparams"]
    curve = entry["loss_curve"]
    print(f"{method:>8} {a:8.4f} {b:8.4f} {curve[0]:9.5f} "
          f"{curve[-1]:10.5f} {entry['train_accuracy']:10.3f} "
          f"{entry['test_accuracy']:9.3f}")
