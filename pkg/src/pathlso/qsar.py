"""Descriptor ridge regression standing in for a learned potency model.

The pipeline mirrors an assay-data workflow at desk scale: split labeled
molecules 80/10/10, fit a regularized linear model on standardized
descriptors, report R-squared / MAE / RMSE per split.  The synthetic oracle
is nearly linear in the descriptors, so the model is accurate by design;
what matters downstream is only that optimization queries a *predictor*
rather than the ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from pathlso.molecules import N_FEATURES, ORACLE_MAX, ORACLE_MIN, featurize


@dataclass(frozen=True)
class LabeledSet:
    """Molecules with potency labels.

    Attributes:
        molecules: valid molecule strings.
        labels: pIC50 values, one per molecule.
    """

    molecules: tuple[str, ...]
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=float)
        object.__setattr__(self, "labels", labels)
        if len(self.molecules) != labels.size:
            raise ValueError("molecules and labels must have equal length")
        if not np.all(np.isfinite(labels)):
            raise ValueError("labels must be finite")

    def __len__(self) -> int:
        return len(self.molecules)


@dataclass(frozen=True)
class RidgeModel:
    """Standardized-feature ridge regressor.

    Attributes:
        lam: L2 penalty on the standardized coefficients (intercept exempt).
        means: per-feature training means.
        scales: per-feature training standard deviations (zeros replaced by 1).
        coefficients: weights in standardized feature space.
        intercept: training label mean.
    """

    lam: float
    means: np.ndarray
    scales: np.ndarray
    coefficients: np.ndarray
    intercept: float


@dataclass(frozen=True)
class Metrics:
    r_squared: float
    mae: float
    rmse: float


def split(
    data: LabeledSet,
    rng: np.random.Generator,
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> tuple[LabeledSet, LabeledSet, LabeledSet]:
    """Random disjoint train/validation/test partition.

    Validation and test sizes are floored fractions of the total; the
    remainder (including all rounding slack) goes to train.  9411 rows at
    80/10/10 therefore split as 7529/941/941.

    Args:
        data: at least 10 labeled molecules.
        rng: source of the permutation; same state gives the same partition.
        fractions: (train, validation, test), summing to 1.
    """
    n = len(data)
    if n < 10:
        raise ValueError(f"need at least 10 examples to split, got {n}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    n_val = int(np.floor(fractions[1] * n))
    n_test = int(np.floor(fractions[2] * n))
    n_train = n - n_val - n_test
    perm = rng.permutation(n)

    def take(idx: np.ndarray) -> LabeledSet:
        return LabeledSet(
            tuple(data.molecules[i] for i in idx), data.labels[idx]
        )

    return (
        take(perm[:n_train]),
        take(perm[n_train : n_train + n_val]),
        take(perm[n_train + n_val :]),
    )


def fit_ridge(train: LabeledSet, lam: float) -> RidgeModel:
    """Solve the standardized ridge normal equations.

    Features are standardized to training mean 0 and variance 1, labels are
    centered, so the intercept decouples and equals the label mean exactly;
    the penalty therefore never shrinks the intercept.

    Args:
        train: more examples than features.
        lam: positive L2 penalty.
    """
    if len(train) <= N_FEATURES:
        raise ValueError(f"need more than {N_FEATURES} examples, got {len(train)}")
    if lam <= 0:
        raise ValueError("lam must be > 0")
    x = np.array([featurize(m) for m in train.molecules])
    means = x.mean(axis=0)
    scales = x.std(axis=0)
    scales = np.where(scales > 0, scales, 1.0)
    xs = (x - means) / scales
    y = train.labels
    yc = y - y.mean()
    gram = xs.T @ xs + lam * np.eye(N_FEATURES)
    coef = np.linalg.solve(gram, xs.T @ yc)
    return RidgeModel(
        lam=float(lam),
        means=means,
        scales=scales,
        coefficients=coef,
        intercept=float(y.mean()),
    )


def predict(model: RidgeModel, m: str) -> float:
    """Predicted pIC50 of one molecule, clamped to the oracle range [0, 10]."""
    f = featurize(m)
    z = (f - model.means) / model.scales
    raw = model.intercept + float(z @ model.coefficients)
    return float(min(ORACLE_MAX, max(ORACLE_MIN, raw)))


def compute_metrics(pred, actual) -> Metrics:
    """R-squared, mean absolute error, and root mean squared error.

    Raises:
        ValueError: on length mismatch, empty input, or zero-variance
            actuals (R-squared undefined).
    """
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("pred and actual must be equal-length non-empty 1-d")
    sst = float(np.sum((a - a.mean()) ** 2))
    if sst == 0.0:
        raise ValueError("actuals have zero variance, r_squared undefined")
    err = p - a
    sse = float(np.sum(err**2))
    return Metrics(
        r_squared=1.0 - sse / sst,
        mae=float(np.mean(np.abs(err))),
        rmse=float(np.sqrt(np.mean(err**2))),
    )


def save_model(path: str, model: RidgeModel) -> None:
    """Persist as JSON: {lambda, means[7], scales[7], coefficients[7], intercept}."""
    doc = {
        "lambda": model.lam,
        "means": [float(v) for v in model.means],
        "scales": [float(v) for v in model.scales],
        "coefficients": [float(v) for v in model.coefficients],
        "intercept": model.intercept,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> RidgeModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("means", "scales", "coefficients"):
        if len(doc[key]) != N_FEATURES:
            raise ValueError(f"model file {path}: {key} must have {N_FEATURES} entries")
    return RidgeModel(
        lam=float(doc["lambda"]),
        means=np.array(doc["means"], dtype=float),
        scales=np.array(doc["scales"], dtype=float),
        coefficients=np.array(doc["coefficients"], dtype=float),
        intercept=float(doc["intercept"]),
    )


def format_metrics_csv(rows: list[tuple[str, Metrics]]) -> str:
    """Per-split metrics as CSV text (header set,r_squared,mae,rmse)."""
    lines = ["set,r_squared,mae,rmse"]
    lines += [f"{name},{m.r_squared:.6g},{m.mae:.6g},{m.rmse:.6g}" for name, m in rows]
    return "\n".join(lines) + "\n"


def write_metrics_csv(path: str, rows: list[tuple[str, Metrics]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_metrics_csv(rows))
