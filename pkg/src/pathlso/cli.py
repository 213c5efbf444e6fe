"""Command-line entry point.

Subcommands: gen-data, dose-response, fit-qsar, score, run, report.  Bad
flags, malformed configuration, and invalid molecule strings exit 2;
runtime failures (integration, training, acquisition, I/O) exit 1, both
with a single diagnostic line on stderr.  Commands with no randomness
accept --seed for uniformity and ignore it.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from pathlso.config import ConfigError, load_config
from pathlso.experiment import aggregate_runs, run_experiment
from pathlso.molecules import (
    InvalidMoleculeError,
    MAX_LEN,
    MIN_LEN,
    oracle_pic50,
    random_molecule,
    read_dataset,
    write_dataset,
)
from pathlso.pathway import (
    apoptosis_triggered,
    dose_response,
    format_dose_response_csv,
    therapeutic_score,
)
from pathlso.qsar import (
    LabeledSet,
    compute_metrics,
    fit_ridge,
    format_metrics_csv,
    load_model,
    predict,
    save_model,
    split,
)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_gen_data(args) -> int:
    rng = np.random.default_rng(args.seed)
    molecules = [
        random_molecule(rng, (args.min_len, args.max_len)) for _ in range(args.count)
    ]
    scores = None if args.no_labels else [oracle_pic50(m) for m in molecules]
    write_dataset(args.out, molecules, scores)
    print(f"wrote {len(molecules)} molecules to {args.out}")
    return 0


def cmd_dose_response(args) -> int:
    cfg = load_config(args.config, {"variant": args.variant})
    n = int(round((args.grid_max - args.grid_min) / args.grid_step)) + 1
    grid = np.linspace(args.grid_min, args.grid_max, n)
    pairs = dose_response(cfg.pathway_variant(), grid, cfg.pathway)
    _emit(format_dose_response_csv(pairs), args.out)
    return 0


def cmd_fit_qsar(args) -> int:
    molecules, labels = read_dataset(args.data)
    if labels is None:
        labels = [oracle_pic50(m) for m in molecules]
    data = LabeledSet(tuple(molecules), np.asarray(labels))
    rng = np.random.default_rng(args.seed)
    train_set, val_set, test_set = split(data, rng)
    model = fit_ridge(train_set, args.lam)
    save_model(args.model_out, model)
    rows = []
    for name, subset in (
        ("train", train_set),
        ("validation", val_set),
        ("test", test_set),
    ):
        pred = [predict(model, m) for m in subset.molecules]
        rows.append((name, compute_metrics(pred, subset.labels)))
    _emit(format_metrics_csv(rows), args.metrics_out)
    return 0


def cmd_score(args) -> int:
    cfg = load_config(args.config, {"variant": args.variant})
    if args.model is not None:
        pic50 = predict(load_model(args.model), args.molecule)
    else:
        pic50 = oracle_pic50(args.molecule)
    score = therapeutic_score(pic50, cfg.pathway_variant(), cfg.pathway)
    print(f"pic50 = {pic50:.6g}")
    print(f"score = {score:.6g}")
    print(f"apoptosis = {'true' if apoptosis_triggered(score) else 'false'}")
    return 0


def cmd_run(args) -> int:
    extra: dict[str, str] = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        extra[key.strip()] = value.strip()
    if args.seed is not None:
        extra["seed"] = str(args.seed)
    cfg = load_config(args.config, extra)
    records = run_experiment(cfg, args.out_dir)
    print(
        f"completed iterations 0..{records[-1].iteration} "
        f"(k={cfg.k:g}, {cfg.variant}, seed {cfg.seed}) in {args.out_dir}"
    )
    return 0


def cmd_report(args) -> int:
    _emit(aggregate_runs(args.run), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathlso",
        description="Pathway-guided latent space optimization over a toy molecule language.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a labeled random dataset file")
    p.add_argument("--count", type=int, default=5000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--min-len", type=int, default=MIN_LEN)
    p.add_argument("--max-len", type=int, default=MAX_LEN)
    p.add_argument("--no-labels", action="store_true", help="omit the oracle pIC50 column")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("dose-response", help="score-versus-pIC50 curve as CSV")
    p.add_argument("--variant", required=True, choices=("viable", "modified", "impractical"))
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.add_argument("--config", default=None)
    p.add_argument("--grid-min", type=float, default=0.0)
    p.add_argument("--grid-max", type=float, default=12.0)
    p.add_argument("--grid-step", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=42, help="accepted for uniformity; deterministic command")
    p.set_defaults(func=cmd_dose_response)

    p = sub.add_parser("fit-qsar", help="fit and persist the ridge potency model")
    p.add_argument("--data", required=True, help="dataset file; unlabeled files are oracle-labeled")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    p.add_argument("--model-out", required=True)
    p.add_argument("--metrics-out", default=None, help="metrics CSV path (default stdout)")
    p.set_defaults(func=cmd_fit_qsar)

    p = sub.add_parser("score", help="potency, therapeutic score, and apoptosis flag of one molecule")
    p.add_argument("--molecule", required=True)
    p.add_argument("--variant", default="viable", choices=("viable", "modified", "impractical"))
    p.add_argument("--model", default=None, help="ridge model JSON; omit to query the oracle")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=42, help="accepted for uniformity; deterministic command")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("run", help="execute a full optimization experiment")
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="per-k comparison tables from run directories")
    p.add_argument("--run", action="append", required=True, help="run directory (repeatable)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=42, help="accepted for uniformity; deterministic command")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidMoleculeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
