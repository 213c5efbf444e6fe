"""Sequence VAE over padded token strings, trained with per-example weights.

Both networks are single-hidden-layer tanh MLPs.  The encoder maps the
one-hot, PAD-padded token sequence (16 positions x 7 symbols = 112 inputs)
to a diagonal Gaussian over the latent space; the decoder maps a latent
point to independent categorical logits for all 16 positions at once.
Validity of decoded strings is enforced at sampling time by masking tokens
that cannot extend to a valid completion, the same bookkeeping the grammar
uses for exact-length sampling.

The training loss is a weighted evidence bound,

    loss = (1/|B|) * sum_i (N * w_i) * [CE_i + beta * KL_i],

where w are the normalized rank weights over the full training set of size
N, CE is the summed cross-entropy over all 16 positions (PAD included, so
the model learns where strings end), and the KL is against a standard
normal.  Gradients are computed analytically; the reparameterization draw
is one noise vector per example per step, shared between the loss and
gradient paths through the caller-provided generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from pathlso.molecules import (
    ALPHABET,
    MAX_DEPTH,
    MAX_LEN,
    MIN_LEN,
    min_completion,
    require_valid,
    step_choices,
)

SEQ_LEN = MAX_LEN
VOCAB_SIZE = len(ALPHABET) + 1  # six grammar tokens + PAD
PAD_IDX = len(ALPHABET)
OPEN_IDX = ALPHABET.index("(")
CLOSE_IDX = ALPHABET.index(")")
INPUT_DIM = SEQ_LEN * VOCAB_SIZE

TOKEN_INDEX = {tok: i for i, tok in enumerate(ALPHABET)}

PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4")


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class VaeParams:
    """Weights of both networks plus the shape metadata they must satisfy.

    Encoder: input (INPUT_DIM) -> tanh hidden -> 2*latent_dim outputs, the
    first half the posterior mean, the second half the log-variance.
    Decoder: latent_dim -> tanh hidden -> INPUT_DIM logits.
    """

    latent_dim: int
    hidden: int
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    w4: np.ndarray
    b4: np.ndarray

    def __post_init__(self):
        expect = _shape_table(self.latent_dim, self.hidden)
        for name in PARAM_FIELDS:
            got = getattr(self, name).shape
            if got != expect[name]:
                raise ValueError(f"{name} has shape {got}, expected {expect[name]}")
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class TrainConfig:
    """First-order training settings (moment-adaptive updates)."""

    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 50
    beta: float = 0.2
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate and batch_size must be > 0")
        if self.epochs < 0 or self.beta < 0:
            raise ValueError("epochs and beta must be >= 0")


def _shape_table(latent_dim: int, hidden: int) -> dict[str, tuple[int, ...]]:
    return {
        "w1": (INPUT_DIM, hidden),
        "b1": (hidden,),
        "w2": (hidden, 2 * latent_dim),
        "b2": (2 * latent_dim,),
        "w3": (latent_dim, hidden),
        "b3": (hidden,),
        "w4": (hidden, INPUT_DIM),
        "b4": (INPUT_DIM,),
    }


def init_params(
    rng: np.random.Generator, latent_dim: int = 8, hidden: int = 64
) -> VaeParams:
    """Scaled-normal weight init (1/sqrt(fan_in)), zero biases."""
    arrays = {}
    for name, shape in _shape_table(latent_dim, hidden).items():
        if name.startswith("w"):
            arrays[name] = rng.standard_normal(shape) / np.sqrt(shape[0])
        else:
            arrays[name] = np.zeros(shape)
    return VaeParams(latent_dim=latent_dim, hidden=hidden, **arrays)


def tokens_to_indices(m: str) -> np.ndarray:
    """Token indices padded with PAD_IDX to SEQ_LEN; molecule must be valid."""
    require_valid(m)
    idx = np.full(SEQ_LEN, PAD_IDX, dtype=np.int64)
    for i, ch in enumerate(m):
        idx[i] = TOKEN_INDEX[ch]
    return idx


def batch_arrays(molecules) -> tuple[np.ndarray, np.ndarray]:
    """One-hot inputs (B, INPUT_DIM) and index targets (B, SEQ_LEN)."""
    targets = np.stack([tokens_to_indices(m) for m in molecules])
    b = targets.shape[0]
    x = np.zeros((b, SEQ_LEN, VOCAB_SIZE))
    x[np.arange(b)[:, None], np.arange(SEQ_LEN)[None, :], targets] = 1.0
    return x.reshape(b, INPUT_DIM), targets


def _encode_batch(p: VaeParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.tanh(x @ p.w1 + p.b1)
    out = h @ p.w2 + p.b2
    return out[:, : p.latent_dim], out[:, p.latent_dim :]


def encode(p: VaeParams, m: str) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation for one molecule."""
    x, _ = batch_arrays([m])
    mu, logvar = _encode_batch(p, x)
    return mu[0], np.exp(0.5 * logvar[0])


def encode_means(p: VaeParams, molecules) -> np.ndarray:
    """Posterior means for a batch of molecules, shape (B, latent_dim)."""
    x, _ = batch_arrays(molecules)
    mu, _ = _encode_batch(p, x)
    return mu


def _decoder_logits(p: VaeParams, z: np.ndarray) -> np.ndarray:
    h = np.tanh(z @ p.w3 + p.b3)
    return (h @ p.w4 + p.b4).reshape(z.shape[0], SEQ_LEN, VOCAB_SIZE)


def decode_batch(p: VaeParams, z: np.ndarray) -> list[str]:
    """Greedy constrained decode of each latent row; always valid strings.

    Position by position, tokens that cannot extend to a valid completion
    within the remaining length are masked out before the argmax: atoms need
    room to close every open parenthesis, an opener also needs room for one
    filler atom, a closer may not follow its opener, PAD is allowed exactly
    when the prefix is already a complete molecule.
    """
    logits = _decoder_logits(p, z)
    b = z.shape[0]
    open_count = np.zeros(b, dtype=np.int64)
    last_open = np.zeros(b, dtype=bool)
    done = np.zeros(b, dtype=bool)
    toks = np.empty((b, SEQ_LEN), dtype=np.int64)
    for pos in range(SEQ_LEN):
        slots_after = SEQ_LEN - pos - 1
        feasible = np.zeros((b, VOCAB_SIZE), dtype=bool)
        feasible[:, :OPEN_IDX] = (~done & (open_count <= slots_after))[:, None]
        feasible[:, OPEN_IDX] = (
            ~done
            & (pos >= 1)
            & (open_count < MAX_DEPTH)
            & (open_count + 2 <= slots_after)
        )
        feasible[:, CLOSE_IDX] = (
            ~done & (open_count >= 1) & ~last_open & (open_count - 1 <= slots_after)
        )
        feasible[:, PAD_IDX] = done | ((pos >= MIN_LEN) & (open_count == 0))
        masked = np.where(feasible, logits[:, pos, :], -np.inf)
        choice = masked.argmax(axis=1)
        toks[:, pos] = choice
        live = ~done
        open_count += live & (choice == OPEN_IDX)
        open_count -= live & (choice == CLOSE_IDX)
        last_open = live & (choice == OPEN_IDX)
        done |= choice == PAD_IDX
    out = []
    for row in toks:
        chars = []
        for v in row:
            if v == PAD_IDX:
                break
            chars.append(ALPHABET[v])
        out.append("".join(chars))
    return out


def decode(
    p: VaeParams,
    z: np.ndarray,
    constrained: bool = True,
    rng: np.random.Generator | None = None,
) -> str:
    """Decode one latent point to a token string.

    Greedy (deterministic) when ``rng`` is None, categorical sampling over
    the feasible tokens otherwise.  With ``constrained`` the result is a
    valid molecule; without it the raw network output is returned and may
    violate the grammar (useful only to measure how much the mask matters).
    """
    z = np.asarray(z, dtype=float).reshape(1, -1)
    if constrained and rng is None:
        return decode_batch(p, z)[0]
    logits = _decoder_logits(p, z)[0]
    tokens: list[str] = []
    open_count = 0
    last_open = False
    for pos in range(SEQ_LEN):
        row = logits[pos]
        if constrained:
            allowed = list(step_choices(pos, open_count, last_open, SEQ_LEN - pos, False))
            if pos >= MIN_LEN and open_count == 0:
                allowed.append(None)  # PAD: prefix is complete
            idx_map = [PAD_IDX if t is None else TOKEN_INDEX[t] for t in allowed]
        else:
            idx_map = list(range(VOCAB_SIZE))
        sub = row[idx_map]
        if rng is None:
            pick = idx_map[int(np.argmax(sub))]
        else:
            prob = np.exp(sub - sub.max())
            prob /= prob.sum()
            pick = idx_map[int(rng.choice(len(idx_map), p=prob))]
        if pick == PAD_IDX:
            break
        tok = ALPHABET[pick]
        tokens.append(tok)
        if tok == "(":
            open_count += 1
            last_open = True
        else:
            if tok == ")":
                open_count -= 1
            last_open = False
    return "".join(tokens)


def sample_prior(rng: np.random.Generator, n: int, latent_dim: int = 8) -> np.ndarray:
    """n independent standard-normal latent points, shape (n, latent_dim)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.standard_normal((n, latent_dim))


# ===================================================================
# Loss and analytic gradients
# ===================================================================


def _per_example_weights(w: np.ndarray, n_total: int, batch: int) -> np.ndarray:
    # (1/|B|) sum_i (N w_i) ... : fold both scalars into one coefficient
    return np.asarray(w, dtype=float) * (n_total / batch)


def _forward(p: VaeParams, x: np.ndarray, targets: np.ndarray, eps: np.ndarray):
    h1 = np.tanh(x @ p.w1 + p.b1)
    out = h1 @ p.w2 + p.b2
    mu = out[:, : p.latent_dim]
    logvar = out[:, p.latent_dim :]
    std = np.exp(0.5 * logvar)
    z = mu + std * eps
    h2 = np.tanh(z @ p.w3 + p.b3)
    logits = (h2 @ p.w4 + p.b4).reshape(-1, SEQ_LEN, VOCAB_SIZE)
    shifted = logits - logits.max(axis=2, keepdims=True)
    logprob = shifted - np.log(np.exp(shifted).sum(axis=2, keepdims=True))
    picked = np.take_along_axis(logprob, targets[:, :, None], axis=2)[:, :, 0]
    ce = -picked.sum(axis=1)
    kl = -0.5 * np.sum(1.0 + logvar - mu**2 - np.exp(logvar), axis=1)
    return {
        "h1": h1,
        "mu": mu,
        "logvar": logvar,
        "std": std,
        "z": z,
        "h2": h2,
        "logprob": logprob,
        "ce": ce,
        "kl": kl,
    }


def weighted_elbo(
    p: VaeParams,
    molecules,
    w,
    n_total: int,
    beta: float,
    rng: np.random.Generator,
) -> float:
    """Weighted training loss of one batch; one noise draw per example.

    Args:
        p: network weights.
        molecules: the batch.
        w: the examples' normalized global weights (sum over the full
            training set is 1), restricted to this batch.
        n_total: full training set size N.
        beta: KL coefficient.
        rng: source of the reparameterization draw; pass a generator in the
            same state to reproduce the draw in ``gradients``.
    """
    x, targets = batch_arrays(molecules)
    eps = rng.standard_normal((x.shape[0], p.latent_dim))
    c = _per_example_weights(w, n_total, x.shape[0])
    f = _forward(p, x, targets, eps)
    return float(np.sum(c * (f["ce"] + beta * f["kl"])))


def _loss_and_grads(
    p: VaeParams,
    x: np.ndarray,
    targets: np.ndarray,
    c: np.ndarray,
    beta: float,
    eps: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    b = x.shape[0]
    f = _forward(p, x, targets, eps)
    loss = float(np.sum(c * (f["ce"] + beta * f["kl"])))

    # d loss / d logits = c_i * (softmax - onehot)
    g_logits = np.exp(f["logprob"])
    np.subtract.at(
        g_logits,
        (np.arange(b)[:, None], np.arange(SEQ_LEN)[None, :], targets),
        1.0,
    )
    g_logits *= c[:, None, None]
    g_flat = g_logits.reshape(b, INPUT_DIM)

    h2 = f["h2"]
    g_w4 = h2.T @ g_flat
    g_b4 = g_flat.sum(axis=0)
    g_h2 = (g_flat @ p.w4.T) * (1.0 - h2**2)
    g_w3 = f["z"].T @ g_h2
    g_b3 = g_h2.sum(axis=0)
    g_z = g_h2 @ p.w3.T

    mu, logvar, std = f["mu"], f["logvar"], f["std"]
    cb = (c * beta)[:, None]
    # z = mu + exp(logvar/2) * eps; KL terms are analytic in (mu, logvar)
    g_mu = g_z + cb * mu
    g_logvar = g_z * (0.5 * std * eps) + cb * 0.5 * (np.exp(logvar) - 1.0)

    g_out = np.concatenate([g_mu, g_logvar], axis=1)
    h1 = f["h1"]
    g_w2 = h1.T @ g_out
    g_b2 = g_out.sum(axis=0)
    g_h1 = (g_out @ p.w2.T) * (1.0 - h1**2)
    g_w1 = x.T @ g_h1
    g_b1 = g_h1.sum(axis=0)

    grads = {
        "w1": g_w1,
        "b1": g_b1,
        "w2": g_w2,
        "b2": g_b2,
        "w3": g_w3,
        "b3": g_b3,
        "w4": g_w4,
        "b4": g_b4,
    }
    return loss, grads


def gradients(
    p: VaeParams,
    molecules,
    w,
    n_total: int,
    beta: float,
    rng: np.random.Generator,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and its exact gradient for one batch.

    The generator must be in the same state as the matching weighted_elbo
    call so both see the same reparameterization noise.
    """
    x, targets = batch_arrays(molecules)
    eps = rng.standard_normal((x.shape[0], p.latent_dim))
    c = _per_example_weights(w, n_total, x.shape[0])
    return _loss_and_grads(p, x, targets, c, beta, eps)


def train(p: VaeParams, molecules, w, cfg: TrainConfig) -> VaeParams:
    """Minibatched Adam over shuffled epochs; deterministic given cfg.seed.

    Args:
        p: initial weights.
        molecules: training set.
        w: normalized weights over exactly this set.
        cfg: optimizer settings; cfg.epochs == 0 returns ``p`` unchanged.

    Raises:
        TrainingDivergedError: a batch loss became non-finite.
    """
    w = np.asarray(w, dtype=float)
    n = len(molecules)
    if w.shape != (n,):
        raise ValueError("one weight per molecule required")
    if cfg.epochs == 0:
        return p
    x_all, t_all = batch_arrays(molecules)
    rng = np.random.default_rng(cfg.seed)
    params = {name: getattr(p, name).copy() for name in PARAM_FIELDS}
    moment1 = {name: np.zeros_like(v) for name, v in params.items()}
    moment2 = {name: np.zeros_like(v) for name, v in params.items()}
    step = 0
    current = p
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            eps = rng.standard_normal((idx.size, p.latent_dim))
            c = _per_example_weights(w[idx], n, idx.size)
            loss, grads = _loss_and_grads(
                current, x_all[idx], t_all[idx], c, cfg.beta, eps
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"loss became {loss} at step {step}")
            step += 1
            bc1 = 1.0 - cfg.adam_beta1**step
            bc2 = 1.0 - cfg.adam_beta2**step
            for name in PARAM_FIELDS:
                g = grads[name]
                moment1[name] = cfg.adam_beta1 * moment1[name] + (1 - cfg.adam_beta1) * g
                moment2[name] = cfg.adam_beta2 * moment2[name] + (1 - cfg.adam_beta2) * g**2
                params[name] = params[name] - cfg.learning_rate * (
                    moment1[name] / bc1
                ) / (np.sqrt(moment2[name] / bc2) + cfg.adam_eps)
            current = replace(current, **params)
    return current


def reconstruction_accuracy(p: VaeParams, molecules) -> float:
    """Per-position token accuracy of greedy decoding from posterior means."""
    _, targets = batch_arrays(molecules)
    decoded = decode_batch(p, encode_means(p, molecules))
    got = np.stack([tokens_to_indices(d) for d in decoded])
    return float(np.mean(got == targets))


# ===================================================================
# Checkpoint I/O
# ===================================================================


def save_params(path: str, p: VaeParams) -> None:
    """Persist weights as JSON with shape metadata and flat arrays."""
    doc = {
        "layout": {
            "seq_len": SEQ_LEN,
            "vocab": VOCAB_SIZE,
            "latent_dim": p.latent_dim,
            "hidden": p.hidden,
        },
        "weights": {
            name: [float(v) for v in getattr(p, name).ravel()]
            for name in PARAM_FIELDS
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_params(path: str) -> VaeParams:
    """Load a checkpoint, validating every array shape against the layout."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    layout = doc["layout"]
    if layout["seq_len"] != SEQ_LEN or layout["vocab"] != VOCAB_SIZE:
        raise ValueError(
            f"checkpoint {path} was written for a different token layout"
        )
    latent_dim, hidden = int(layout["latent_dim"]), int(layout["hidden"])
    arrays = {}
    for name, shape in _shape_table(latent_dim, hidden).items():
        flat = np.array(doc["weights"][name], dtype=float)
        if flat.size != int(np.prod(shape)):
            raise ValueError(f"checkpoint {path}: {name} has wrong size")
        arrays[name] = flat.reshape(shape)
    return VaeParams(latent_dim=latent_dim, hidden=hidden, **arrays)
