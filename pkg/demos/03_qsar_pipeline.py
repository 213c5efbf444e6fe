"""Potency model pipeline: label, split, fit ridge, evaluate."""

import numpy as np

from pathlso.molecules import oracle_pic50, random_molecule
from pathlso.qsar import LabeledSet, compute_metrics, fit_ridge, predict, split

rng = np.random.default_rng(11)
molecules = tuple(random_molecule(rng) for _ in range(2000))
labels = np.array([oracle_pic50(m) for m in molecules])
data = LabeledSet(molecules, labels)

train_set, val_set, test_set = split(data, np.random.default_rng(12))
print(f"split sizes: train {len(train_set.molecules)}, "
      f"validation {len(val_set.molecules)}, test {len(test_set.molecules)}")

model = fit_ridge(train_set, lam=1e-3)
print("\nset          r_squared      mae     rmse")
for name, subset in (("train", train_set), ("validation", val_set), ("test", test_set)):
    pred = [predict(model, m) for m in subset.molecules]
    m = compute_metrics(pred, subset.labels)
    print(f"{name:<12} {m.r_squared:9.4f} {m.mae:8.4f} {m.rmse:8.4f}")

print("\nstandardized coefficients (nC, nN, nO, nF, rings, length, motif):")
print("  " + "  ".join(f"{c:+.3f}" for c in model.coefficients))
print(f"intercept (label mean): {model.intercept:.3f}")
