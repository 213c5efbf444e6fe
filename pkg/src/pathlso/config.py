"""Flat key = value configuration files for experiment runs.

One key per line, ``#`` starts a comment, blank lines ignored.  Every key
has a default; unknown keys are rejected by name so typos fail loudly.
"""

from __future__ import annotations

from pathlso.experiment import ExperimentConfig
from pathlso.pathway import PathwayParams


class ConfigError(ValueError):
    """Malformed configuration file or unknown/invalid key."""


def _bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError("expected true or false")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (parser, ExperimentConfig attribute path, description)
SCHEMA: dict[str, tuple] = {
    "seed": (int, "seed", "root seed; every stage derives a named substream"),
    "variant": (str, "variant", "dose variant: viable, modified, or impractical"),
    "k": (float, "k", "rank-weighting exponent"),
    "iterations": (int, "iterations", "retraining iterations after the initial fit"),
    "acquisitions_per_iter": (int, "acquisitions_per_iter", "molecules acquired per iteration"),
    "initial_size": (int, "initial_size", "initial dataset size"),
    "subset_fraction": (float, "subset_fraction", "fraction of the original dataset refreshed into each retrain set"),
    "gp_top": (int, "gp_top", "top-scoring molecules in the surrogate fit set"),
    "gp_random": (int, "gp_random", "randomly drawn molecules in the surrogate fit set"),
    "probe_count": (int, "probe_count", "fixed latent probes decoded every iteration"),
    "objective_source": (str, "objective_source", "potency stage: qsar (predictor) or oracle (ablation)"),
    "iteration0_weighted": (_bool, "iteration0_weighted", "apply rank weights already to the initial full-dataset training"),
    "qsar.lambda": (float, "qsar_lambda", "ridge penalty of the potency model"),
    "dose.viable": (float, "dose_viable", "inhibitor dose (molar) of the viable variant"),
    "dose.modified": (float, "dose_modified", "inhibitor dose (molar) of the modified variant"),
    "dose.impractical": (float, "dose_impractical", "inhibitor dose (molar) of the impractical variant"),
    "pathway.d0": (float, "pathway.d0", "initial double-strand break count"),
    "pathway.p_tot": (float, "pathway.p_tot", "total PARP1 pool"),
    "pathway.g_tot": (float, "pathway.g_tot", "total p53 pool"),
    "pathway.c_tot": (float, "pathway.c_tot", "total procaspase pool"),
    "pathway.k1": (float, "pathway.k1", "PARP1 + break binding rate"),
    "pathway.k2": (float, "pathway.k2", "PARP1 complex dissociation rate"),
    "pathway.k3": (float, "pathway.k3", "repair rate"),
    "pathway.k4": (float, "pathway.k4", "p53 + break binding rate"),
    "pathway.k5": (float, "pathway.k5", "p53 complex dissociation rate"),
    "pathway.k6": (float, "pathway.k6", "caspase activation rate"),
    "pathway.t_end": (float, "pathway.t_end", "simulation horizon"),
    "pathway.rtol": (float, "pathway.rtol", "solver relative tolerance"),
    "pathway.atol": (float, "pathway.atol", "solver absolute tolerance"),
    "vae.latent_dim": (int, "latent_dim", "latent space dimension"),
    "vae.hidden": (int, "hidden", "hidden layer width of both networks"),
    "vae.learning_rate": (float, "learning_rate", "optimizer step size"),
    "vae.batch_size": (int, "batch_size", "minibatch size"),
    "vae.epochs_initial": (int, "epochs_initial", "epochs for the initial full-dataset training"),
    "vae.epochs_retrain": (int, "epochs_retrain", "epochs per retraining iteration"),
    "vae.beta": (float, "beta", "KL coefficient in the training loss"),
    "vae.adam_beta1": (float, "adam_beta1", "first-moment decay"),
    "vae.adam_beta2": (float, "adam_beta2", "second-moment decay"),
    "vae.adam_eps": (float, "adam_eps", "optimizer stability epsilon"),
    "bo.pool_size": (int, "pool_size", "acquisition candidate pool size"),
    "bo.perturbation_scale": (float, "perturbation_scale", "noise scale around top latents in the pool"),
    "bo.min_separation": (float, "min_separation", "minimum pairwise distance within an acquired batch"),
    "bo.jitter": (float, "jitter", "initial relative kernel jitter"),
    "bo.jitter_max": (float, "jitter_max", "largest jitter tried before the fit fails"),
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw key -> value strings from file text; unknown keys rejected."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config_file(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=path)


def build_config(overrides: dict[str, str]) -> ExperimentConfig:
    """Defaults plus overrides, parsed and cross-validated.

    Raises:
        ConfigError: unknown key, unparsable value, or invalid combination.
    """
    kwargs: dict = {}
    pathway_kwargs: dict = {}
    for key, value in overrides.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        parser, attr, _ = SCHEMA[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse {value!r} ({exc})") from exc
        if attr.startswith("pathway."):
            pathway_kwargs[attr.split(".", 1)[1]] = parsed
        else:
            kwargs[attr] = parsed
    try:
        if pathway_kwargs:
            kwargs["pathway"] = PathwayParams(**pathway_kwargs)
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | None, extra: dict[str, str] | None = None) -> ExperimentConfig:
    """Config from an optional file plus override pairs (file keys lose)."""
    overrides = read_config_file(path) if path else {}
    for key, value in (extra or {}).items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        overrides[key] = value
    return build_config(overrides)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render every key in schema order; parse(serialize(cfg)) round-trips."""
    lines = []
    for key, (_, attr, _) in SCHEMA.items():
        if attr.startswith("pathway."):
            value = getattr(cfg.pathway, attr.split(".", 1)[1])
        else:
            value = getattr(cfg, attr)
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def describe_keys() -> str:
    """Key reference: name, default, one-line description."""
    default = ExperimentConfig()
    lines = []
    for key, (_, attr, help_text) in SCHEMA.items():
        if attr.startswith("pathway."):
            value = getattr(default.pathway, attr.split(".", 1)[1])
        else:
            value = getattr(default, attr)
        lines.append(f"{key} (default {_fmt(value)}): {help_text}")
    return "\n".join(lines) + "\n"
