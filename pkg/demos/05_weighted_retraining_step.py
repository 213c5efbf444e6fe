"""Rank weighting in isolation: what the exponent k actually does.

Weights depend on scores only through ranks: w_i is proportional to
1 / (1e-k * N + rank_i).  Larger k concentrates the training signal on
the current best molecules; k -> 0 recovers uniform weighting.
"""

import numpy as np

from pathlso.weighting import rank, weights

scores = np.array([2.1, 9.4, 5.0, 5.0, 7.3, 1.0, 8.8, 3.2])
n = len(scores)
print("scores:", scores.tolist())
print("ranks: ", rank(scores).tolist(), "(0 = best, ties share)")

print("\n        " + "".join(f"  w(k={k})" for k in (0.0, 4.0, 6.0)))
table = {k: weights(scores, k) for k in (0.0, 4.0, 6.0)}
for i, s in enumerate(scores):
    row = f"s={s:4.1f} " + "".join(f"{table[k][i]:9.4f}" for k in table)
    print(row)

for k in (4.0, 6.0):
    w = weights(scores, k)
    eps_n = 10.0 ** (-k) * n
    print(f"\nk={k:g}: top/bottom weight ratio {w.max() / w.min():12.1f} "
          f"(formula (1e-{k:g}*N + N - 1) / (1e-{k:g}*N) = {(eps_n + n - 1) / eps_n:.1f})")

# monotone transforms of the scores leave the weights untouched
w_raw = weights(scores, 5.0)
w_log = weights(np.log(scores), 5.0)
print("\nweights invariant under log-transform of scores:",
      bool(np.array_equal(w_raw, w_log)))
