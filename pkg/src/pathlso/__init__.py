"""Pathway-model-guided latent space optimization over a toy molecule language.

The package wires together five pieces: a valid-by-construction molecule
grammar with a synthetic potency oracle (`molecules`), a mass-action
reaction-network simulator mapping potency to a therapeutic score
(`pathway`), a ridge potency predictor (`qsar`), a sequence VAE with
rank-weighted retraining (`vae`, `weighting`), and a Gaussian-process
acquisition loop over the VAE latent space (`gp`, `experiment`).
"""

from pathlso.molecules import (
    InvalidMoleculeError,
    enumerate_valid,
    featurize,
    oracle_pic50,
    random_molecule,
    validate,
)
from pathlso.pathway import (
    IntegrationError,
    PathwayParams,
    PathwayVariant,
    VARIANTS,
    apoptosis_triggered,
    dose_response,
    occupancy,
    simulate,
    therapeutic_score,
)
from pathlso.qsar import RidgeModel, compute_metrics, fit_ridge, predict, split
from pathlso.weighting import rank, weights
from pathlso.vae import TrainConfig, VaeParams, decode, encode, sample_prior, train
from pathlso.gp import GpModel, acquire_batch, expected_improvement, fit_gp, posterior
from pathlso.experiment import ExperimentConfig, run_experiment

__version__ = "0.1.0"

__all__ = [
    "InvalidMoleculeError",
    "enumerate_valid",
    "featurize",
    "oracle_pic50",
    "random_molecule",
    "validate",
    "IntegrationError",
    "PathwayParams",
    "PathwayVariant",
    "VARIANTS",
    "apoptosis_triggered",
    "dose_response",
    "occupancy",
    "simulate",
    "therapeutic_score",
    "RidgeModel",
    "compute_metrics",
    "fit_ridge",
    "predict",
    "split",
    "rank",
    "weights",
    "TrainConfig",
    "VaeParams",
    "decode",
    "encode",
    "sample_prior",
    "train",
    "GpModel",
    "acquire_batch",
    "expected_improvement",
    "fit_gp",
    "posterior",
    "ExperimentConfig",
    "run_experiment",
]
