"""Autoencoder basics: train briefly, then encode, decode, and sample.

Decoding is constrained by the grammar's feasibility masks, so every
latent point maps to a valid molecule whatever the network weights say.
"""

import numpy as np

from pathlso.molecules import random_molecule, validate
from pathlso.vae import (
    TrainConfig,
    decode,
    decode_batch,
    encode,
    init_params,
    reconstruction_accuracy,
    sample_prior,
    train,
    weighted_elbo,
)

rng = np.random.default_rng(21)
molecules = [random_molecule(rng) for _ in range(300)]
w = np.full(300, 1.0 / 300.0)

p0 = init_params(np.random.default_rng(22), latent_dim=8, hidden=32)
cfg = TrainConfig(epochs=30, seed=23)
print(f"training on {len(molecules)} molecules for {cfg.epochs} epochs ...")
p1 = train(p0, molecules, w, cfg)

for label, p in (("before", p0), ("after", p1)):
    loss = weighted_elbo(p, molecules, w, 300, cfg.beta, np.random.default_rng(24))
    acc = reconstruction_accuracy(p, molecules)
    print(f"  {label:<7} loss {loss:8.2f}   token reconstruction accuracy {acc:.2f}")

print("\nround trips (molecule -> latent mean -> greedy decode)")
for m in molecules[:6]:
    mu, _ = encode(p1, m)
    print(f"  {m:<16} -> {decode(p1, mu)}")

z = sample_prior(np.random.default_rng(25), 8, 8)
samples = decode_batch(p1, z)
assert all(validate(m) for m in samples)
print("\nprior samples:", " ".join(samples))
