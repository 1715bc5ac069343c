"""
Writing evaluation results: report.json plus plot-ready CSV tables.
"""
import json
import os

import numpy as np
import pandas as pd

from src.mappings.report_format import AUC_BY_SEED_COLUMNS, MI_MATRIX_COLUMNS
from src.utils.data_loader import save_csv


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return None if not np.isfinite(value) else float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(data, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, default=_json_default)
    return path


def summarize(reports):
    """Seed-averaged AUC per source."""
    frame = pd.DataFrame([row for report in reports for row in report.auc_rows()], columns=AUC_BY_SEED_COLUMNS)
    return frame.groupby('source', sort=False)['auc'].mean().to_dict()


def write_eval_outputs(out_dir, reports):
    """
    Write report.json, auc_by_seed.csv and mi_matrix.csv.

    Args:
        out_dir (str): Output directory.
        reports (list): EvalReport per seed.

    Returns:
        dict: file role -> path.
    """
    paths = {}
    summary = summarize(reports)
    payload = {
        'seeds': [r.seed for r in reports],
        'mean_auc': summary,
        'oracle_ceiling_violations': {r.seed: r.ceiling_violations() for r in reports},
        'reports': [r.to_dict() for r in reports],
    }
    paths['report'] = write_json(payload, os.path.join(out_dir, 'report.json'))

    auc = pd.DataFrame([row for r in reports for row in r.auc_rows()], columns=AUC_BY_SEED_COLUMNS)
    paths['auc_by_seed'] = save_csv(auc, os.path.join(out_dir, 'auc_by_seed.csv'))

    mi = pd.DataFrame([row for r in reports for row in r.mi], columns=MI_MATRIX_COLUMNS)
    if not mi.empty:
        mi = mi.groupby(['slot', 'factor'], sort=False).agg(mi=('mi', 'mean'), n=('n', 'first')).reset_index()
    paths['mi_matrix'] = save_csv(mi[MI_MATRIX_COLUMNS], os.path.join(out_dir, 'mi_matrix.csv'))
    return paths
