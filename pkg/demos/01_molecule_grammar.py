"""Tour of the toy molecule language: validity, features, the oracle."""

import numpy as np

from pathlso.molecules import (
    enumerate_valid,
    featurize,
    oracle_pic50,
    random_molecule,
    validate,
)

FEATURE_NAMES = ("nC", "nN", "nO", "nF", "rings", "length", "motif")

candidates = ["CCCC", "NCO(N)", "CN(CO)", "C(N)", "CC()", "(CC)", "CCC", "N((C))"]
print("validity")
for m in candidates:
    print(f"  {m:<10} {'valid' if validate(m) else 'invalid'}")

print("\nfeatures and oracle potency")
for m in ("CCCC", "CN(CO)", "NCO((N))"):
    pairs = ", ".join(f"{n}={v:g}" for n, v in zip(FEATURE_NAMES, featurize(m)))
    print(f"  {m:<10} {pairs}  ->  pIC50 {oracle_pic50(m):.2f}")

print("\nlanguage size by length")
total = 0
for length in range(4, 9):
    count = sum(len(m) == length for m in enumerate_valid(length))
    total += count
    print(f"  length {length}: {count:>7} molecules")
print(f"  lengths 4-8 combined: {total}")

rng = np.random.default_rng(7)
sample = [random_molecule(rng) for _ in range(8)]
print("\nuniform random draws:", " ".join(sample))
best = max(sample, key=oracle_pic50)
print(f"most potent draw: {best} (pIC50 {oracle_pic50(best):.2f})")
