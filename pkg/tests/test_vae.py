"""Sequence autoencoder: exact gradients, constrained decoding, training.

The analytic gradients are checked against central finite differences, and
the loss against a reference forward pass written here from the loss
definition (tanh layers, full-length cross-entropy including padding,
Gaussian KL), sharing nothing with the library but the noise draw.
"""

from dataclasses import replace

import numpy as np
import pytest

from pathlso.molecules import random_molecule, validate
from pathlso.vae import (
    INPUT_DIM,
    PAD_IDX,
    PARAM_FIELDS,
    SEQ_LEN,
    TOKEN_INDEX,
    TrainConfig,
    TrainingDivergedError,
    VOCAB_SIZE,
    VaeParams,
    batch_arrays,
    decode,
    decode_batch,
    encode,
    encode_means,
    gradients,
    init_params,
    load_params,
    reconstruction_accuracy,
    sample_prior,
    save_params,
    tokens_to_indices,
    train,
    weighted_elbo,
)


def _molecules(seed: int, n: int) -> list[str]:
    rng = np.random.default_rng(seed)
    return [random_molecule(rng) for _ in range(n)]


def _reference_per_example_losses(p, molecules, eps):
    """Per-example (ce, kl) computed directly from the loss definition."""
    ces, kls = [], []
    for i, m in enumerate(molecules):
        idx = np.full(SEQ_LEN, PAD_IDX, dtype=int)
        for j, ch in enumerate(m):
            idx[j] = TOKEN_INDEX[ch]
        x = np.zeros((SEQ_LEN, VOCAB_SIZE))
        x[np.arange(SEQ_LEN), idx] = 1.0
        h1 = np.tanh(x.reshape(-1) @ p.w1 + p.b1)
        out = h1 @ p.w2 + p.b2
        mu, logvar = out[: p.latent_dim], out[p.latent_dim :]
        z = mu + np.exp(0.5 * logvar) * eps[i]
        h2 = np.tanh(z @ p.w3 + p.b3)
        logits = (h2 @ p.w4 + p.b4).reshape(SEQ_LEN, VOCAB_SIZE)
        ce = 0.0
        for t in range(SEQ_LEN):
            row = logits[t] - logits[t].max()
            ce -= row[idx[t]] - np.log(np.exp(row).sum())
        kl = -0.5 * float(np.sum(1.0 + logvar - mu**2 - np.exp(logvar)))
        ces.append(ce)
        kls.append(kl)
    return np.array(ces), np.array(kls)


# ===================================================================
# representation
# ===================================================================


def test_tokens_to_indices_pads_to_full_length():
    idx = tokens_to_indices("CN(CO)")
    assert idx.tolist() == [0, 1, 4, 0, 2, 5] + [PAD_IDX] * 10


def test_batch_arrays_one_hot():
    x, targets = batch_arrays(["CCCC", "FONC"])
    assert x.shape == (2, INPUT_DIM)
    assert targets.shape == (2, SEQ_LEN)
    assert np.all(x.reshape(2, SEQ_LEN, VOCAB_SIZE).sum(axis=2) == 1.0)
    assert targets[1, 0] == TOKEN_INDEX["F"]


def test_init_params_shapes_and_determinism():
    a = init_params(np.random.default_rng(0), latent_dim=3, hidden=5)
    b = init_params(np.random.default_rng(0), latent_dim=3, hidden=5)
    assert a.w2.shape == (5, 6)
    assert a.w4.shape == (5, INPUT_DIM)
    assert np.all(a.b1 == 0.0)
    for name in PARAM_FIELDS:
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_params_shape_validation():
    p = init_params(np.random.default_rng(1), latent_dim=3, hidden=5)
    with pytest.raises(ValueError):
        replace(p, w3=np.zeros((4, 5)))
    with pytest.raises(ValueError):
        replace(p, b1=np.full(5, np.nan))


def test_encode_shapes():
    p = init_params(np.random.default_rng(2), latent_dim=8, hidden=16)
    mu, std = encode(p, "CN(CO)")
    assert mu.shape == (8,)
    assert std.shape == (8,)
    assert np.all(std > 0)
    ms = _molecules(3, 5)
    batch = encode_means(p, ms)
    assert batch.shape == (5, 8)
    for i, m in enumerate(ms):
        # batched and single-row matmuls may differ in the last bits
        assert batch[i] == pytest.approx(encode(p, m)[0], rel=1e-12)


# ===================================================================
# loss and gradients
# ===================================================================


def test_loss_matches_reference_forward():
    p = init_params(np.random.default_rng(4), latent_dim=4, hidden=6)
    ms = _molecules(5, 8)
    rng = np.random.default_rng(6)
    w = rng.random(8)
    w /= w.sum()
    eps = np.random.default_rng(7).standard_normal((8, 4))
    ce, kl = _reference_per_example_losses(p, ms, eps)
    # full batch: the per-example coefficient reduces to w_i itself
    expected = float(np.sum(w * (ce + 0.2 * kl)))
    got = weighted_elbo(p, ms, w, 8, 0.2, np.random.default_rng(7))
    assert got == pytest.approx(expected, rel=1e-12)


def test_uniform_weights_equal_unweighted_mean():
    p = init_params(np.random.default_rng(8), latent_dim=4, hidden=6)
    ms = _molecules(9, 12)
    eps = np.random.default_rng(10).standard_normal((12, 4))
    ce, kl = _reference_per_example_losses(p, ms, eps)
    mean_loss = float(np.mean(ce + 0.2 * kl))
    got = weighted_elbo(p, ms, np.full(12, 1.0 / 12.0), 12, 0.2, np.random.default_rng(10))
    assert abs(got - mean_loss) <= 1e-10 * max(1.0, abs(mean_loss))


def test_minibatch_coefficient_scales_by_population():
    # batch of 3 from a population of 30: coefficients are w_i * 30 / 3
    p = init_params(np.random.default_rng(11), latent_dim=4, hidden=6)
    ms = _molecules(12, 3)
    w = np.array([0.01, 0.02, 0.03])
    eps = np.random.default_rng(13).standard_normal((3, 4))
    ce, kl = _reference_per_example_losses(p, ms, eps)
    expected = float(np.sum(w * 10.0 * (ce + 0.2 * kl)))
    got = weighted_elbo(p, ms, w, 30, 0.2, np.random.default_rng(13))
    assert got == pytest.approx(expected, rel=1e-12)


def test_gradients_return_the_same_loss():
    p = init_params(np.random.default_rng(14), latent_dim=4, hidden=6)
    ms = _molecules(15, 8)
    w = np.full(8, 1.0 / 8.0)
    loss_a = weighted_elbo(p, ms, w, 8, 0.2, np.random.default_rng(16))
    loss_b, grads = gradients(p, ms, w, 8, 0.2, np.random.default_rng(16))
    assert loss_a == loss_b
    assert set(grads) == set(PARAM_FIELDS)
    for name in PARAM_FIELDS:
        assert grads[name].shape == getattr(p, name).shape


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradients_match_finite_differences(seed):
    rng0 = np.random.default_rng(100 + seed)
    ms = [random_molecule(rng0) for _ in range(6)]
    w = np.random.default_rng(200 + seed).random(6)
    w /= w.sum()
    p = init_params(np.random.default_rng(seed), latent_dim=3, hidden=5)
    noise_seed = 300 + seed
    _, grads = gradients(p, ms, w, 6, 0.2, np.random.default_rng(noise_seed))

    h = 1e-4
    coord_rng = np.random.default_rng(400 + seed)
    for _ in range(60):
        name = PARAM_FIELDS[int(coord_rng.integers(len(PARAM_FIELDS)))]
        arr = getattr(p, name)
        idx = np.unravel_index(int(coord_rng.integers(arr.size)), arr.shape)

        def loss_at(delta):
            pert = arr.copy()
            pert[idx] += delta
            return weighted_elbo(
                replace(p, **{name: pert}), ms, w, 6, 0.2,
                np.random.default_rng(noise_seed),
            )

        fd = (loss_at(h) - loss_at(-h)) / (2.0 * h)
        an = grads[name][idx]
        assert abs(fd - an) <= 1e-4 * max(abs(fd), abs(an), 1e-8), (name, idx)


# ===================================================================
# decoding
# ===================================================================


def test_greedy_constrained_decode_is_always_valid():
    p = init_params(np.random.default_rng(20), latent_dim=8, hidden=16)
    z = sample_prior(np.random.default_rng(21), 2000, 8)
    for m in decode_batch(p, z):
        assert validate(m)


def test_single_decode_agrees_with_batch():
    p = init_params(np.random.default_rng(22), latent_dim=8, hidden=16)
    z = sample_prior(np.random.default_rng(23), 50, 8)
    batch = decode_batch(p, z)
    for i in range(50):
        assert decode(p, z[i]) == batch[i]


def test_stochastic_constrained_decode_is_valid_and_seeded():
    p = init_params(np.random.default_rng(24), latent_dim=8, hidden=16)
    z = sample_prior(np.random.default_rng(25), 300, 8)
    for i in range(300):
        m = decode(p, z[i], rng=np.random.default_rng(i))
        assert validate(m)
        assert m == decode(p, z[i], rng=np.random.default_rng(i))


def test_unconstrained_decode_can_break_the_grammar():
    p = init_params(np.random.default_rng(26), latent_dim=8, hidden=16)
    z = sample_prior(np.random.default_rng(27), 400, 8)
    results = [decode(p, z[i], constrained=False) for i in range(400)]
    assert any(not validate(m) for m in results)


def test_sample_prior_guard():
    with pytest.raises(ValueError):
        sample_prior(np.random.default_rng(0), 0, 8)


# ===================================================================
# training
# ===================================================================


def test_training_reduces_fixed_probe_loss():
    ms = _molecules(30, 200)
    w = np.full(200, 1.0 / 200.0)
    p0 = init_params(np.random.default_rng(31), latent_dim=8, hidden=32)
    cfg = TrainConfig(epochs=8, seed=32)
    p1 = train(p0, ms, w, cfg)
    before = weighted_elbo(p0, ms, w, 200, cfg.beta, np.random.default_rng(33))
    after = weighted_elbo(p1, ms, w, 200, cfg.beta, np.random.default_rng(33))
    assert after < before


def test_training_is_deterministic():
    ms = _molecules(34, 64)
    w = np.full(64, 1.0 / 64.0)
    p0 = init_params(np.random.default_rng(35), latent_dim=4, hidden=8)
    cfg = TrainConfig(epochs=3, seed=36)
    a = train(p0, ms, w, cfg)
    b = train(p0, ms, w, cfg)
    for name in PARAM_FIELDS:
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_zero_epochs_is_identity():
    ms = _molecules(37, 10)
    p0 = init_params(np.random.default_rng(38), latent_dim=4, hidden=8)
    p1 = train(p0, ms, np.full(10, 0.1), TrainConfig(epochs=0))
    assert p1 is p0


def test_divergence_is_reported():
    ms = _molecules(39, 32)
    p0 = init_params(np.random.default_rng(40), latent_dim=4, hidden=8)
    with np.errstate(all="ignore"):
        with pytest.raises(TrainingDivergedError):
            train(p0, ms, np.full(32, 1.0 / 32.0), TrainConfig(learning_rate=1e8, epochs=3, seed=41))


def test_train_config_guards():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=-1)


def test_reconstruction_accuracy_improves_with_training():
    ms = _molecules(42, 150)
    w = np.full(150, 1.0 / 150.0)
    p0 = init_params(np.random.default_rng(43), latent_dim=8, hidden=32)
    p1 = train(p0, ms, w, TrainConfig(epochs=80, seed=44))
    acc0 = reconstruction_accuracy(p0, ms)
    acc1 = reconstruction_accuracy(p1, ms)
    assert 0.0 <= acc0 <= 1.0
    assert acc1 > acc0 + 0.2


# ===================================================================
# persistence
# ===================================================================


def test_checkpoint_roundtrip(tmp_path):
    p = init_params(np.random.default_rng(45), latent_dim=6, hidden=12)
    path = str(tmp_path / "vae.json")
    save_params(path, p)
    q = load_params(path)
    assert q.latent_dim == 6
    assert q.hidden == 12
    for name in PARAM_FIELDS:
        assert np.array_equal(getattr(p, name), getattr(q, name))


def test_checkpoint_rejects_inconsistent_shapes(tmp_path):
    import json

    p = init_params(np.random.default_rng(46), latent_dim=4, hidden=8)
    path = tmp_path / "vae.json"
    save_params(str(path), p)
    doc = json.loads(path.read_text())
    doc["weights"]["b4"] = doc["weights"]["b4"][:-1]
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_params(str(path))
