"""Retraining-loop orchestration, telemetry, and on-disk run layout.

One experiment: generate and score an initial dataset, train the VAE on all
of it with rank weights, then iterate retrain -> fit surrogate -> acquire ->
score -> probe.  Every stage draws from a named substream of the experiment
seed, so runs are reproducible byte for byte.

Run directory layout:
    config.snapshot      resolved configuration, one key = value per line
    iterations.csv       iter,k,variant,min,median,mean,p90,max,unique_count,train_size
    probes_iter{t}.csv   probe_id,molecule,pic50,score
    acquired.csv         iter,molecule,pic50,score
    vae_iter{t}.json     checkpoint after iteration t's training
    qsar_model.json      the potency model queried by the objective
    dataset.tsv          initial molecules with oracle labels
    run_manifest.json    status: running / complete / failed
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from pathlso.gp import AcquisitionConfig, acquire_batch, fit_gp
from pathlso.molecules import oracle_pic50, random_molecule, write_dataset
from pathlso.pathway import PathwayParams, PathwayVariant, therapeutic_score
from pathlso.qsar import LabeledSet, RidgeModel, fit_ridge, predict, save_model
from pathlso.seeds import child_seed, substream
from pathlso.vae import TrainConfig, decode_batch, encode_means, init_params, sample_prior, save_params, train
from pathlso.weighting import weights as rank_weights

OBJECTIVE_SOURCES = ("qsar", "oracle")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings for one optimization run.

    Attributes mirror the flat configuration keys; see config.SCHEMA for
    the key names, defaults, and one-line descriptions.
    """

    seed: int = 42
    variant: str = "viable"
    k: float = 6.0
    iterations: int = 10
    acquisitions_per_iter: int = 50
    initial_size: int = 5000
    subset_fraction: float = 0.10
    gp_top: int = 200
    gp_random: int = 800
    probe_count: int = 5000
    objective_source: str = "qsar"
    iteration0_weighted: bool = True
    qsar_lambda: float = 1e-3
    dose_viable: float = 1e-6
    dose_modified: float = 1e-4
    dose_impractical: float = 1e-1
    pathway: PathwayParams = field(default_factory=PathwayParams)
    latent_dim: int = 8
    hidden: int = 64
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs_initial: int = 50
    epochs_retrain: int = 10
    beta: float = 0.2
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    pool_size: int = 4096
    perturbation_scale: float = 0.1
    min_separation: float = 1e-3
    jitter: float = 1e-6
    jitter_max: float = 1e-2

    def __post_init__(self):
        if self.objective_source not in OBJECTIVE_SOURCES:
            raise ValueError(f"objective_source must be one of {OBJECTIVE_SOURCES}")
        if self.variant not in ("viable", "modified", "impractical"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 < self.subset_fraction <= 1.0:
            raise ValueError("subset_fraction must be in (0, 1]")
        for name in ("iterations",):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("acquisitions_per_iter", "initial_size", "probe_count", "gp_top", "gp_random"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.gp_top + self.gp_random > self.initial_size:
            raise ValueError("gp_top + gp_random must not exceed initial_size")

    def pathway_variant(self) -> PathwayVariant:
        dose = {
            "viable": self.dose_viable,
            "modified": self.dose_modified,
            "impractical": self.dose_impractical,
        }[self.variant]
        return PathwayVariant(self.variant, dose)

    def train_config(self, epochs: int, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=epochs,
            beta=self.beta,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
            seed=seed,
        )

    def acquisition_config(self) -> AcquisitionConfig:
        return AcquisitionConfig(
            batch_size=self.acquisitions_per_iter,
            pool_size=self.pool_size,
            perturbation_scale=self.perturbation_scale,
            min_separation=self.min_separation,
        )


@dataclass(frozen=True)
class IterationRecord:
    """Telemetry for one iteration's fixed-probe sweep."""

    iteration: int
    score_min: float
    score_median: float
    score_mean: float
    score_p90: float
    score_max: float
    unique_count: int
    train_size: int
    acquired: tuple[tuple[str, float, float], ...] = ()


class Objective:
    """Two-stage score of a molecule, memoized per canonical string.

    Stage one predicts potency (ridge model, or the oracle directly for
    ablation); stage two runs the pathway simulation at that potency.
    """

    def __init__(
        self,
        variant: PathwayVariant,
        params: PathwayParams,
        source: str = "qsar",
        model: RidgeModel | None = None,
    ):
        if source not in OBJECTIVE_SOURCES:
            raise ValueError(f"source must be one of {OBJECTIVE_SOURCES}")
        if source == "qsar" and model is None:
            raise ValueError("qsar source requires a fitted model")
        self.variant = variant
        self.params = params
        self.source = source
        self.model = model
        self.cache: dict[str, tuple[float, float]] = {}

    def scored(self, m: str) -> tuple[float, float]:
        """(pic50, therapeutic score) for one molecule."""
        hit = self.cache.get(m)
        if hit is None:
            if self.source == "qsar":
                pic50 = predict(self.model, m)
            else:
                pic50 = oracle_pic50(m)
            hit = (pic50, therapeutic_score(pic50, self.variant, self.params))
            self.cache[m] = hit
        return hit

    def __call__(self, m: str) -> float:
        return self.scored(m)[1]


def select_bo_fit_set(
    scored: list[tuple[str, float]], n_top: int, n_random: int, rng: np.random.Generator
) -> list[tuple[str, float]]:
    """Surrogate fit set: the n_top best plus n_random uniform others.

    Input pairs are deduplicated by molecule string (first occurrence wins;
    scores are memoized per string, so duplicates carry equal scores).  Ties
    at the top boundary break by string order.  The returned list has the
    top block first, then the random draws.
    """
    seen: set[str] = set()
    unique: list[tuple[str, float]] = []
    for mol, score in scored:
        if mol not in seen:
            seen.add(mol)
            unique.append((mol, score))
    if n_top + n_random > len(unique):
        raise ValueError(
            f"need {n_top}+{n_random} distinct molecules, have {len(unique)}"
        )
    ordered = sorted(unique, key=lambda pair: (-pair[1], pair[0]))
    top = ordered[:n_top]
    rest = ordered[n_top:]
    if n_random:
        idx = rng.choice(len(rest), size=n_random, replace=False)
        return top + [rest[i] for i in idx]
    return top


def probe_latent(
    vae_params, probes: np.ndarray, objective: Objective
) -> tuple[list[tuple[int, str, float, float]], np.ndarray, int]:
    """Greedy-decode every probe and score it.

    Returns:
        (rows, scores, unique_count) where rows are
        (probe_id, molecule, pic50, score) in probe order.
    """
    molecules = decode_batch(vae_params, probes)
    rows = []
    for i, m in enumerate(molecules):
        pic50, score = objective.scored(m)
        rows.append((i, m, pic50, score))
    scores = np.array([r[3] for r in rows])
    return rows, scores, len(set(molecules))


def _record_from_probe(
    iteration: int,
    scores: np.ndarray,
    unique_count: int,
    train_size: int,
    acquired: tuple[tuple[str, float, float], ...],
) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        score_min=float(scores.min()),
        score_median=float(np.median(scores)),
        score_mean=float(scores.mean()),
        score_p90=float(np.percentile(scores, 90)),
        score_max=float(scores.max()),
        unique_count=unique_count,
        train_size=train_size,
        acquired=acquired,
    )


def _write_iterations_csv(path: str, cfg: ExperimentConfig, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,k,variant,min,median,mean,p90,max,unique_count,train_size\n")
        for r in records:
            fh.write(
                f"{r.iteration},{cfg.k:.6g},{cfg.variant},"
                f"{r.score_min:.6g},{r.score_median:.6g},{r.score_mean:.6g},"
                f"{r.score_p90:.6g},{r.score_max:.6g},"
                f"{r.unique_count},{r.train_size}\n"
            )


def _write_probes_csv(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("probe_id,molecule,pic50,score\n")
        for probe_id, mol, pic50, score in rows:
            fh.write(f"{probe_id},{mol},{pic50:.6g},{score:.6g}\n")


def _write_acquired_csv(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,molecule,pic50,score\n")
        for r in records:
            for mol, pic50, score in r.acquired:
                fh.write(f"{r.iteration},{mol},{pic50:.6g},{score:.6g}\n")


def _write_manifest(path: str, status: str, completed: int, error: str | None) -> None:
    doc = {"status": status, "iterations_completed": completed, "error": error}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig, out_dir: str) -> list[IterationRecord]:
    """Execute the full protocol, persisting artifacts as it goes.

    Returns the iteration records, index 0 being the probe sweep right
    after initial training and index t the sweep after iteration t's
    retrain/acquire step.  On any stage failure the manifest records the
    error before the exception propagates.
    """
    from pathlso.config import serialize_config  # local import, avoids a cycle

    os.makedirs(out_dir, exist_ok=True)
    path = lambda name: os.path.join(out_dir, name)
    with open(path("config.snapshot"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))
    _write_manifest(path("run_manifest.json"), "running", 0, None)

    records: list[IterationRecord] = []
    try:
        # ---- initial dataset, potency model, objective ----
        rng_data = substream(cfg.seed, "dataset")
        initial = [random_molecule(rng_data) for _ in range(cfg.initial_size)]
        labels = np.array([oracle_pic50(m) for m in initial])
        write_dataset(path("dataset.tsv"), initial, list(labels))
        model = fit_ridge(LabeledSet(tuple(initial), labels), cfg.qsar_lambda)
        save_model(path("qsar_model.json"), model)
        objective = Objective(
            cfg.pathway_variant(), cfg.pathway, cfg.objective_source, model
        )
        dataset: list[tuple[str, float]] = [(m, objective(m)) for m in initial]

        probes = sample_prior(substream(cfg.seed, "probes"), cfg.probe_count, cfg.latent_dim)

        # ---- iteration 0: train on the full dataset ----
        scores0 = np.array([s for _, s in dataset])
        if cfg.iteration0_weighted:
            w0 = rank_weights(scores0, cfg.k)
        else:
            w0 = np.full(len(dataset), 1.0 / len(dataset))
        params = init_params(
            np.random.default_rng(child_seed(cfg.seed, "init")),
            cfg.latent_dim,
            cfg.hidden,
        )
        params = train(
            params,
            initial,
            w0,
            cfg.train_config(cfg.epochs_initial, child_seed(cfg.seed, "train-0")),
        )
        save_params(path("vae_iter0.json"), params)
        rows, probe_scores, unique = probe_latent(params, probes, objective)
        records.append(
            _record_from_probe(0, probe_scores, unique, len(dataset), ())
        )
        _write_probes_csv(path("probes_iter0.csv"), rows)
        _write_iterations_csv(path("iterations.csv"), cfg, records)
        _write_manifest(path("run_manifest.json"), "running", 0, None)

        acquired_all: list[tuple[str, float, float]] = []
        acq_cfg = cfg.acquisition_config()
        subset_size = int(np.floor(cfg.subset_fraction * cfg.initial_size))
        if cfg.iterations > 0 and subset_size < 1:
            raise ValueError(
                "subset_fraction * initial_size must be at least 1 to retrain"
            )

        for t in range(1, cfg.iterations + 1):
            # (a) retrain on a fresh subset of the original data plus
            #     everything acquired so far, reweighted over that set
            sub_idx = substream(cfg.seed, f"subset-{t}").choice(
                cfg.initial_size, size=subset_size, replace=False
            )
            retrain = [dataset[i] for i in sub_idx]
            retrain += [(mol, score) for mol, _, score in acquired_all]
            retrain_mols = [m for m, _ in retrain]
            retrain_scores = np.array([s for _, s in retrain])
            w = rank_weights(retrain_scores, cfg.k)
            params = train(
                params,
                retrain_mols,
                w,
                cfg.train_config(cfg.epochs_retrain, child_seed(cfg.seed, f"train-{t}")),
            )

            # (b) surrogate over encoded fit set
            rng_bo = substream(cfg.seed, f"bo-{t}")
            fit_set = select_bo_fit_set(dataset, cfg.gp_top, cfg.gp_random, rng_bo)
            fit_mols = [m for m, _ in fit_set]
            z = encode_means(params, fit_mols)
            y = np.array([s for _, s in fit_set])
            surrogate = fit_gp(
                z, y, cfg.min_separation, cfg.jitter, cfg.jitter_max
            )

            # (c) acquire, decode, score, append
            top_latents = z[: cfg.gp_top]
            batch = acquire_batch(surrogate, acq_cfg, top_latents, rng_bo)
            batch_mols = decode_batch(params, batch)
            acquired_now = []
            for m in batch_mols:
                pic50, score = objective.scored(m)
                acquired_now.append((m, pic50, score))
                dataset.append((m, score))
            acquired_all.extend(acquired_now)

            # (d) probe and persist
            save_params(path(f"vae_iter{t}.json"), params)
            rows, probe_scores, unique = probe_latent(params, probes, objective)
            records.append(
                _record_from_probe(
                    t, probe_scores, unique, len(retrain), tuple(acquired_now)
                )
            )
            _write_probes_csv(path(f"probes_iter{t}.csv"), rows)
            _write_iterations_csv(path("iterations.csv"), cfg, records)
            _write_acquired_csv(path("acquired.csv"), records)
            _write_manifest(path("run_manifest.json"), "running", t, None)

        _write_acquired_csv(path("acquired.csv"), records)
        _write_manifest(path("run_manifest.json"), "complete", cfg.iterations, None)
        return records
    except Exception as exc:
        completed = records[-1].iteration if records else -1
        _write_manifest(path("run_manifest.json"), "failed", completed, str(exc))
        raise


def aggregate_runs(run_dirs: list[str]) -> str:
    """Merge iterations.csv files into per-k comparison tables.

    Produces two CSV blocks (median probe score and unique molecule count
    by iteration), one column per run, columns ordered by (k, variant).
    A pure function of the CSV contents.
    """
    runs = []
    for d in run_dirs:
        with open(os.path.join(d, "iterations.csv"), "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            idx = {name: i for i, name in enumerate(header)}
            rows = [line.strip().split(",") for line in fh if line.strip()]
        if not rows:
            raise ValueError(f"{d}: empty iterations.csv")
        k = rows[0][idx["k"]]
        variant = rows[0][idx["variant"]]
        by_iter = {
            int(r[idx["iter"]]): (r[idx["median"]], r[idx["unique_count"]])
            for r in rows
        }
        runs.append((float(k), variant, k, by_iter))
    runs.sort(key=lambda r: (r[0], r[1]))
    variants = {r[1] for r in runs}
    labels = []
    for _, variant, k_str, _ in runs:
        label = f"k={k_str}" if len(variants) == 1 else f"k={k_str}/{variant}"
        while label in labels:
            label += "'"
        labels.append(label)
    iters = sorted({i for r in runs for i in r[3]})
    lines = ["# median probe score by iteration", "iter," + ",".join(labels)]
    for i in iters:
        cells = [r[3][i][0] if i in r[3] else "" for r in runs]
        lines.append(f"{i}," + ",".join(cells))
    lines.append("")
    lines.append("# unique probe molecules by iteration")
    lines.append("iter," + ",".join(labels))
    for i in iters:
        cells = [r[3][i][1] if i in r[3] else "" for r in runs]
        lines.append(f"{i}," + ",".join(cells))
    return "\n".join(lines) + "\n"
