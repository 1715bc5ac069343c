"""
Linear probes on frozen features for the fall-within-K event.
"""
import logging
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.metrics import roc_auc_score

from src.tensor import ops
from src.tensor.autograd import backward
from src.tensor.optim import AdamConfig, adam_step
from src.tensor.params import ParameterStore
from src.tensor.rng import SeededRng

log = logging.getLogger(__name__)

MIN_PROBE_SAMPLES = 500


@dataclass
class ProbeReport:
    """AUC and accuracy of one probe; ``n`` counts every labelled sample used."""
    source: str
    target: str
    auc: float
    accuracy: float
    n: int
    n_test: int = 0

    def to_dict(self):
        return asdict(self)


def auc_score(labels, scores):
    """
    Rank-statistic AUC; tied scores count one half.

    Raises:
        ValueError: If only one class is present.
    """
    labels = np.asarray(labels, dtype=bool)
    if labels.all() or not labels.any():
        raise ValueError(f"AUC needs both classes; got {int(labels.sum())} positives of {labels.size}")
    return float(roc_auc_score(labels, np.asarray(scores, dtype=np.float64)))


def holdout_split(groups, fraction, rng):
    """
    Boolean test mask holding out whole groups (episodes).

    Falls back to a per-sample split when there are too few groups.
    """
    groups = np.asarray(groups)
    unique = np.unique(groups)
    n_test = int(round(fraction * unique.size))
    if 1 <= n_test < unique.size:
        held = unique[rng.permutation(unique.size)[:n_test]]
        return np.isin(groups, held)
    test = np.zeros(groups.size, dtype=bool)
    test[rng.permutation(groups.size)[:max(1, int(round(fraction * groups.size)))]] = True
    return test


def fit_logistic(features, labels, steps, lr):
    """
    Logistic regression trained with Adam on two-class logits [0, z].

    Returns:
        tuple: (weights (D,), bias)
    """
    n, dim = features.shape
    store = ParameterStore()
    store.create('probe.w', np.zeros((dim, 1)))
    store.create('probe.b', np.zeros(1))
    targets = labels.astype(np.int64)
    hyper = AdamConfig(lr=lr)
    zeros = np.zeros((n, 1))
    for _ in range(steps):
        z = ops.add(ops.matmul(features, store.node('probe.w')), store.node('probe.b'))
        loss = ops.cross_entropy(ops.concat([zeros, z], axis=1), targets)
        adam_step(store, backward(loss, store), hyper)
    return store.value('probe.w')[:, 0], float(store.value('probe.b')[0])


def probe_outcome(features, labels, source='conscious', target='fall', seed=0, groups=None,
                  holdout=0.3, steps=300, lr=0.05, min_samples=MIN_PROBE_SAMPLES):
    """
    Train a logistic probe on frozen features and report held-out AUC.

    Args:
        features (numpy.ndarray): (n, D) features per sample.
        labels (numpy.ndarray): (n,) booleans.
        source (str): Name of the feature source.
        target (str): Name of the event.
        seed (int): Split seed.
        groups (numpy.ndarray, optional): Episode id per sample; held-out samples come from
            whole episodes.
        holdout (float): Fraction held out for scoring.
        steps (int): Adam steps.
        lr (float): Adam learning rate.
        min_samples (int): Minimum number of samples.

    Returns:
        ProbeReport: Held-out AUC and accuracy at probability 0.5.

    Raises:
        ValueError: With fewer than ``min_samples`` samples, a single class, or a split that
            leaves one class on either side.
    """
    features = np.asarray(features, dtype=np.float64).reshape(len(labels), -1)
    labels = np.asarray(labels, dtype=bool)
    if labels.size < min_samples:
        raise ValueError(f"probe needs at least {min_samples} samples, got {labels.size}")
    if labels.all() or not labels.any():
        raise ValueError(f"probe labels for {source}/{target} hold a single class")

    groups = np.arange(labels.size) if groups is None else np.asarray(groups)
    test = holdout_split(groups, holdout, SeededRng(seed).fork('probe-split'))
    if labels[test].all() or not labels[test].any() or labels[~test].all() or not labels[~test].any():
        raise ValueError(f"probe split for {source}/{target} leaves one class on a side")
    fit = ~test
    log.debug("Probe %s/%s: %d fit, %d held out", source, target, int(fit.sum()), int(test.sum()))

    mean = features[fit].mean(axis=0)
    std = np.maximum(features[fit].std(axis=0), 1e-8)
    scaled = (features - mean) / std
    weights, bias = fit_logistic(scaled[fit], labels[fit], steps, lr)
    scores = scaled[test] @ weights + bias
    return ProbeReport(
        source=source,
        target=target,
        auc=auc_score(labels[test], scores),
        accuracy=float(np.mean((scores > 0) == labels[test])),
        n=int(labels.size),
        n_test=int(test.sum()),
    )
