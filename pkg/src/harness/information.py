"""
Plug-in mutual information between slot readouts and ground-truth factors.
"""
import numpy as np
import pandas as pd
from sklearn.metrics import mutual_info_score

from src.mappings.report_format import MI_MATRIX_COLUMNS

MIN_MI_SAMPLES = 2000


def histogram_discretize(values, bins=16):
    """
    Bin codes of a 1-D sample.

    Samples with at most ``bins`` distinct values keep one code per value; others are cut at
    the edges of a ``bins``-bin histogram.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    unique, codes = np.unique(values, return_inverse=True)
    if unique.size <= bins:
        return codes
    return np.digitize(values, np.histogram(values, bins)[1][:-1])


def mutual_information(a, b, bins=16, min_samples=MIN_MI_SAMPLES):
    """
    Plug-in MI in nats between two samples after discretisation.

    Raises:
        ValueError: With fewer than ``min_samples`` paired samples.
    """
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"samples differ in length: {a.size} vs {b.size}")
    if a.size < min_samples:
        raise ValueError(f"mutual information needs at least {min_samples} samples, got {a.size}")
    return max(0.0, float(mutual_info_score(histogram_discretize(a, bins), histogram_discretize(b, bins))))


def mi_frame(readouts, factors, bins=16, min_samples=MIN_MI_SAMPLES):
    """
    MI of every slot readout with every factor.

    Args:
        readouts (numpy.ndarray): (n, M) slot readouts.
        factors (dict): factor name -> (n,) values.

    Returns:
        pandas.DataFrame: columns slot, factor, mi, n.
    """
    readouts = np.asarray(readouts)
    rows = []
    for slot in range(readouts.shape[1]):
        for name, values in factors.items():
            rows.append({
                'slot': slot,
                'factor': name,
                'mi': mutual_information(readouts[:, slot], values, bins, min_samples),
                'n': int(readouts.shape[0]),
            })
    return pd.DataFrame(rows, columns=MI_MATRIX_COLUMNS)


def slot_relevance(readouts, factors, usage, random_slots, bins=16):
    """
    Mean MI of selected slots versus random slots with a set of factors.

    Args:
        readouts (numpy.ndarray): (n, M) readouts on the samples of interest.
        factors (dict): name -> (n,) factor values.
        usage (numpy.ndarray): (M,) selection counts on those samples.
        random_slots (numpy.ndarray): Slot ids of the random comparison set.

    Returns:
        dict: selected_mi, random_mi, n.
    """
    readouts = np.asarray(readouts)
    per_slot = np.array([
        np.mean([mutual_information(readouts[:, m], v, bins, min_samples=1) for v in factors.values()])
        for m in range(readouts.shape[1])
    ])
    usage = np.asarray(usage, dtype=np.float64)
    selected = float(np.sum(per_slot * usage) / usage.sum()) if usage.sum() > 0 else float('nan')
    return {
        'selected_mi': selected,
        'random_mi': float(np.mean(per_slot[np.asarray(random_slots)])),
        'n': int(readouts.shape[0]),
    }
