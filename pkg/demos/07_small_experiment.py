"""A complete optimization run at toy scale, plus the comparison report.

Writes two run directories under ./demo_runs (k=4 and k=6, same seed) and
prints the merged per-iteration tables.  Scale is deliberately tiny; the
defaults in ExperimentConfig are the desk-scale settings.
"""

from pathlso.config import build_config
from pathlso.experiment import aggregate_runs, run_experiment

BASE = {
    "seed": "17",
    "initial_size": "200",
    "iterations": "3",
    "acquisitions_per_iter": "8",
    "gp_top": "30",
    "gp_random": "90",
    "probe_count": "100",
    "vae.epochs_initial": "6",
    "vae.epochs_retrain": "2",
    "vae.hidden": "32",
    "bo.pool_size": "512",
}

dirs = []
for k in ("4.0", "6.0"):
    out = f"demo_runs/k{k[0]}"
    cfg = build_config(dict(BASE, k=k))
    print(f"running k={k} -> {out}")
    records = run_experiment(cfg, out)
    last = records[-1]
    print(f"  final iteration: median {last.score_median:.1f}, "
          f"max {last.score_max:.1f}, unique {last.unique_count}/{cfg.probe_count}")
    dirs.append(out)

print("\n" + aggregate_runs(dirs))
