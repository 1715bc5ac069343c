"""
Script to summarize a run directory: manifest, final losses and the AUC table.

    python analyze_run.py runs/20261018-101500
"""
import os
import sys

import pandas as pd

from src.mappings.report_format import AUC_BY_SEED_COLUMNS, LOSS_CURVE_COLUMNS
from src.training.trainer import LOSS_CURVE_FILE, METRICS_FILE
from src.utils.data_loader import load_csv, read_jsonl
from src.utils.manifest import MANIFEST_FILE, read_manifest


def final_losses(run_dir, tail=100):
    """Mean of the last ``tail`` metrics rows, or None when the run has no metrics."""
    metrics_path = os.path.join(run_dir, METRICS_FILE)
    if os.path.exists(metrics_path):
        frame = pd.DataFrame(read_jsonl(metrics_path))
    elif os.path.exists(os.path.join(run_dir, LOSS_CURVE_FILE)):
        frame = load_csv(os.path.join(run_dir, LOSS_CURVE_FILE))
    else:
        return None
    if frame.empty:
        return None
    numeric = [c for c in frame.columns if c != 'slot_usage' and c != 'step']
    summary = frame.tail(tail)[numeric].mean()
    summary['step'] = int(frame['step'].iloc[-1])
    return summary


def auc_table(run_dir):
    path = os.path.join(run_dir, 'auc_by_seed.csv')
    if not os.path.exists(path):
        return None
    frame = load_csv(path)[AUC_BY_SEED_COLUMNS]
    return frame.pivot_table(index='source', columns='seed', values='auc', sort=False)


def analyze_run(run_dir):
    """Print what a run directory holds."""
    if not os.path.exists(os.path.join(run_dir, MANIFEST_FILE)):
        print(f"No {MANIFEST_FILE} in {run_dir}.")
        return 1

    manifest = read_manifest(run_dir)
    print("\n" + "=" * 80)
    print(f"RUN {run_dir}")
    print("=" * 80)
    print(f"command: {manifest['command']}  seed: {manifest['seed']}  version: {manifest['version']}")
    print(f"argv: {' '.join(manifest['argv'])}")

    losses = final_losses(run_dir)
    if losses is not None:
        print(f"\nFinal losses (mean of last rows up to step {losses['step']}):")
        for name in LOSS_CURVE_COLUMNS[1:] + [c for c in losses.index if c not in LOSS_CURVE_COLUMNS]:
            if name in losses.index:
                print(f"  {name:<10} {losses[name]:.4f}")

    table = auc_table(run_dir)
    if table is not None:
        table['mean'] = table.mean(axis=1)
        print("\nFall-prediction AUC by source and seed:")
        print(table.round(3).to_string())
    print("=" * 80)
    return 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: python analyze_run.py RUN_DIR", file=sys.stderr)
        sys.exit(1)
    sys.exit(analyze_run(sys.argv[1]))
