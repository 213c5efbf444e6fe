"""Gaussian-process surrogate and expected-improvement batch acquisition.

Squared-exponential kernel k(a, b) = sigma2 * exp(-||a-b||^2 / (2 ell^2)),
hyperparameters picked from a fixed 8x8 log grid by maximum log marginal
likelihood, targets standardized before fitting.  The jitter is relative to
the signal variance (K = sigma2 * [R + jitter * I]), so the posterior
variance floor at a training input scales with sigma2 no matter which grid
cell wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import ndtr

SIGMA2_GRID = np.logspace(-2.0, 1.0, 8)
ELL_GRID = np.logspace(-1.0, 1.0, 8)

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class AcquisitionShortfallError(RuntimeError):
    """Candidate pool exhausted before the batch filled.

    Attributes:
        batch: the points selected before exhaustion, shape (m, d) with
            m < the requested batch size.
    """

    def __init__(self, message: str, batch: np.ndarray):
        super().__init__(message)
        self.batch = batch


@dataclass(frozen=True)
class GpModel:
    """Fitted surrogate state.

    ``constant`` marks the zero-target-variance short-circuit, where the
    posterior is the single observed value with zero variance everywhere
    and no factorization is stored.
    """

    x_train: np.ndarray
    targets_std: np.ndarray
    signal_var: float
    length_scale: float
    jitter: float
    chol: np.ndarray | None
    alpha: np.ndarray | None
    y_mean: float
    y_scale: float
    y_best: float
    constant: bool = False


@dataclass(frozen=True)
class AcquisitionConfig:
    """Batch-acquisition settings."""

    batch_size: int = 50
    pool_size: int = 4096
    perturbation_scale: float = 0.1
    min_separation: float = 1e-3

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.pool_size < self.batch_size:
            raise ValueError("pool_size must be >= batch_size")


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.sum(a**2, axis=1)[:, None]
    bb = np.sum(b**2, axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * (a @ b.T), 0.0)


def dedupe_rows(x: np.ndarray, y: np.ndarray, min_separation: float):
    """Keep the first of any group of rows closer than min_separation."""
    keep: list[int] = []
    for i in range(x.shape[0]):
        if not keep:
            keep.append(i)
            continue
        d2 = np.sum((x[keep] - x[i]) ** 2, axis=1)
        if np.min(d2) >= min_separation**2:
            keep.append(i)
    idx = np.array(keep, dtype=np.int64)
    return x[idx], y[idx]


def log_marginal_likelihood(
    d2: np.ndarray, t: np.ndarray, sigma2: float, ell: float, jitter: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """LML of standardized targets at fixed hyperparameters.

    Returns:
        (lml, chol, alpha); raises np.linalg.LinAlgError when the kernel
        matrix is not positive definite at this jitter.
    """
    n = t.size
    k = sigma2 * (np.exp(-d2 / (2.0 * ell**2)) + jitter * np.eye(n))
    chol = np.linalg.cholesky(k)
    alpha = solve_triangular(
        chol.T, solve_triangular(chol, t, lower=True), lower=False
    )
    lml = (
        -0.5 * float(t @ alpha)
        - float(np.sum(np.log(np.diag(chol))))
        - 0.5 * n * np.log(2.0 * np.pi)
    )
    return lml, chol, alpha


def fit_gp(
    x,
    y,
    min_separation: float = 1e-3,
    jitter: float = 1e-6,
    jitter_max: float = 1e-2,
) -> GpModel:
    """Fit the surrogate: dedupe, standardize, grid-search, factorize.

    Args:
        x: latent points, shape (n, d).
        y: raw objective values, shape (n,).
        min_separation: dedupe radius for near-identical inputs.
        jitter: initial relative diagonal, escalated tenfold on Cholesky
            failure up to jitter_max before giving up.

    Raises:
        np.linalg.LinAlgError: no grid cell factorized at any jitter level.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError("x must be (n, d) with matching y of shape (n,)")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    x, y = dedupe_rows(x, y, min_separation)
    y_best = float(y.max())
    y_mean = float(y.mean())
    y_scale = float(y.std())
    if y_scale < 1e-12:
        return GpModel(
            x_train=x,
            targets_std=np.zeros_like(y),
            signal_var=1.0,
            length_scale=1.0,
            jitter=jitter,
            chol=None,
            alpha=None,
            y_mean=y_mean,
            y_scale=0.0,
            y_best=y_best,
            constant=True,
        )
    t = (y - y_mean) / y_scale
    d2 = _sq_dists(x, x)
    n = t.size
    eye = np.eye(n)
    log2pi = np.log(2.0 * np.pi)
    best = None
    # K = sigma2 * (R + j I), so PD and the Cholesky of (R + j I) depend
    # only on ell; the sigma2 sweep is then analytic in one quadratic form.
    for ell in ELL_GRID:
        r = np.exp(-d2 / (2.0 * ell**2))
        j = jitter
        chol_r = None
        while j <= jitter_max:
            try:
                chol_r = np.linalg.cholesky(r + j * eye)
                break
            except np.linalg.LinAlgError:
                j *= 10.0
        if chol_r is None:
            continue
        w = solve_triangular(chol_r, t, lower=True)
        quad = float(w @ w)  # t^T (R + j I)^{-1} t
        logdet_r = 2.0 * float(np.sum(np.log(np.diag(chol_r))))
        for sigma2 in SIGMA2_GRID:
            lml = -0.5 * (quad / sigma2 + logdet_r + n * np.log(sigma2) + n * log2pi)
            if best is None or lml > best[0]:
                best = (lml, sigma2, ell, j, chol_r, w)
    if best is None:
        raise np.linalg.LinAlgError(
            f"kernel matrix not positive definite at any jitter <= {jitter_max}"
        )
    _, sigma2, ell, j, chol_r, w = best
    chol = np.sqrt(sigma2) * chol_r
    alpha = solve_triangular(chol_r.T, w, lower=False) / sigma2
    return GpModel(
        x_train=x,
        targets_std=t,
        signal_var=float(sigma2),
        length_scale=float(ell),
        jitter=float(j),
        chol=chol,
        alpha=alpha,
        y_mean=y_mean,
        y_scale=y_scale,
        y_best=y_best,
    )


def _posterior_batch(gp: GpModel, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if gp.constant:
        n = z.shape[0]
        return np.full(n, gp.y_mean), np.zeros(n)
    d2 = _sq_dists(z, gp.x_train)
    k_star = gp.signal_var * np.exp(-d2 / (2.0 * gp.length_scale**2))
    mean_std = k_star @ gp.alpha
    v = solve_triangular(gp.chol, k_star.T, lower=True)
    var_std = gp.signal_var - np.sum(v**2, axis=0)
    var_std = np.maximum(var_std, 0.0)  # clip -1e-12-scale dust
    return gp.y_mean + gp.y_scale * mean_std, gp.y_scale**2 * var_std


def posterior(gp: GpModel, z) -> tuple[float, float]:
    """Predictive mean and variance at one latent point (raw target units)."""
    mean, var = _posterior_batch(gp, np.asarray(z, dtype=float).reshape(1, -1))
    return float(mean[0]), float(var[0])


def _ei_values(mean: np.ndarray, var: np.ndarray, best: float) -> np.ndarray:
    s = np.sqrt(var)
    diff = mean - best
    out = np.maximum(diff, 0.0)
    live = s > 0
    u = np.zeros_like(mean)
    np.divide(diff, s, out=u, where=live)
    ei_live = diff * ndtr(u) + s * INV_SQRT_2PI * np.exp(-0.5 * u**2)
    return np.where(live, ei_live, out)


def expected_improvement(gp: GpModel, z, best: float) -> float:
    """EI = (mu - best) Phi(u) + s phi(u) with u = (mu - best)/s; max(0, mu - best) at s = 0."""
    mean, var = _posterior_batch(gp, np.asarray(z, dtype=float).reshape(1, -1))
    return float(_ei_values(mean, var, best)[0])


def acquire_batch(
    gp: GpModel,
    cfg: AcquisitionConfig,
    top_latents,
    rng: np.random.Generator,
) -> np.ndarray:
    """Select a well-separated, EI-ranked batch from a sampled candidate pool.

    The pool is half fresh prior draws and half Gaussian perturbations of
    the provided high-scoring latents.  Candidates are visited in
    descending EI order (ties by pool position) and kept greedily whenever
    they sit at least min_separation from everything already kept.

    Raises:
        AcquisitionShortfallError: fewer than batch_size sufficiently
            separated candidates existed; carries the partial batch.
    """
    top = np.asarray(top_latents, dtype=float)
    if top.ndim != 2 or top.shape[0] < 1:
        raise ValueError("top_latents must be a non-empty (m, d) array")
    d = gp.x_train.shape[1]
    n_prior = cfg.pool_size // 2
    n_pert = cfg.pool_size - n_prior
    prior = rng.standard_normal((n_prior, d))
    picks = rng.integers(0, top.shape[0], size=n_pert)
    perturbed = top[picks] + cfg.perturbation_scale * rng.standard_normal((n_pert, d))
    pool = np.vstack([prior, perturbed])
    mean, var = _posterior_batch(gp, pool)
    ei = _ei_values(mean, var, gp.y_best)
    order = np.argsort(-ei, kind="stable")
    chosen: list[np.ndarray] = []
    min_d2 = cfg.min_separation**2
    for idx in order:
        cand = pool[idx]
        if chosen and np.min(np.sum((np.array(chosen) - cand) ** 2, axis=1)) < min_d2:
            continue
        chosen.append(cand)
        if len(chosen) == cfg.batch_size:
            return np.array(chosen)
    raise AcquisitionShortfallError(
        f"pool yielded only {len(chosen)} of {cfg.batch_size} separated points",
        np.array(chosen),
    )
