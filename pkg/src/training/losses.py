"""
Loss terms of the training objective and their weighted composition.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.tensor import ops

# Probability floor before logs
PROB_FLOOR = 1e-12
# Floor inside p * log(p) so zero probabilities contribute exactly zero
ENTROPY_FLOOR = 1e-300


def nce_loss(score_pos, scores_neg):
    """
    Noise-contrastive loss -log(exp(s+) / (exp(s+) + sum exp(s-))), averaged over rows.

    Args:
        score_pos (Node): (n,) positive scores, or a scalar.
        scores_neg (Node): (n, N_neg) negative scores, or (N_neg,) for a single row.

    Returns:
        Node: scalar loss >= 0.
    """
    negatives = np.shape(getattr(scores_neg, 'value', scores_neg))[-1]
    if negatives < 1:
        raise ValueError("nce_loss needs at least one negative")
    pos = ops.reshape(score_pos, (-1, 1))
    neg = ops.reshape(scores_neg, (pos.value.shape[0], negatives))
    logits = ops.concat([pos, neg], axis=1)
    return ops.cross_entropy(logits, np.zeros(pos.value.shape[0], dtype=np.int64))


def in_batch_negatives(matrix, count):
    """
    Pick ``count`` cyclic off-diagonal negatives per row of a (B, B) score matrix.

    Row i takes columns i+1, ..., i+count (mod B).

    Returns:
        tuple: (positives Node (B,), negatives Node (B, count))
    """
    batch = matrix.value.shape[0]
    if not 1 <= count <= batch - 1:
        raise ValueError(f"negatives {count} must be in [1, {batch - 1}]")
    rows = np.arange(batch)
    flat = ops.reshape(matrix, (batch * batch,))
    positives = ops.gather_rows(flat, rows * batch + rows)
    columns = (rows[:, None] + np.arange(1, count + 1)[None, :]) % batch
    negatives = ops.gather_rows(flat, (rows[:, None] * batch + columns).reshape(-1))
    return positives, ops.reshape(negatives, (batch, count))


def prediction_loss(probs, bins):
    """
    Mean of -log(max(p[bin], 1e-12)) over rows.

    Args:
        probs (Node): (n, V) predicted distributions.
        bins (array-like of int): (n,) realised bins; constants, so no gradient reaches them.
    """
    n, classes = probs.value.shape
    bins = np.asarray(bins, dtype=np.int64).reshape(-1)
    if bins.min() < 0 or bins.max() >= classes:
        raise ValueError(f"bins must lie in [0, {classes - 1}]")
    picked = ops.gather_rows(ops.reshape(probs, (n * classes,)), np.arange(n) * classes + bins)
    return ops.scale(ops.mean(ops.log(ops.clip_min(picked, PROB_FLOOR))), -1.0)


def _entropy(probs, axis=-1):
    return ops.scale(ops.sum(ops.multiply(probs, ops.log(ops.clip_min(probs, ENTROPY_FLOOR))), axis=axis), -1.0)


def entropy_regularizer(attention):
    """
    Mean attention entropy over rows, in [0, ln M]. Maximised.

    Args:
        attention (Node): (n, M) rows summing to 1.
    """
    return ops.mean(_entropy(attention, axis=1))


def slot_usage_frequencies(selection):
    """
    Empirical distribution of selected slot ids across a batch.

    Args:
        selection (Node): (n, M) selection weights with k ones per row (forward values).

    Returns:
        Node: (M,) frequencies summing to 1; gradients follow the selection weights.
    """
    return ops.scale(ops.sum(selection, axis=0), 1.0 / float(np.sum(selection.value)))


def diversity_regularizer(frequencies):
    """Entropy of the slot-usage distribution, in [0, ln M]. Maximised."""
    return _entropy(frequencies, axis=0)


def variance_floor_penalty(values, floor):
    """
    Mean over features of max(0, floor - batch variance).

    Args:
        values (Node): (n, D) values across the batch.
        floor (float): Minimum variance before the penalty starts.
    """
    centred = ops.subtract(values, ops.mean(values, axis=0, keepdims=True))
    variance = ops.mean(ops.multiply(centred, centred), axis=0)
    return ops.mean(ops.relu(ops.subtract(floor, variance)))


def reconstruction_loss(reconstruction, observations):
    """Mean squared error between decoded and actual observation vectors."""
    return ops.squared_error(reconstruction, observations)


@dataclass
class LossBreakdown:
    """
    Scalar parts of one training step.

    ``entropy`` and ``diversity`` are maximised, so they enter ``total`` with negative weights.
    """
    total: float
    nce: float
    prediction: float
    entropy: float
    diversity: float
    variance: float = 0.0
    reconstruction: float = 0.0
    attention_entropy: float = 0.0
    slot_usage: List[int] = field(default_factory=list)
    grad_norm: float = 0.0

    def recomposed(self, config):
        """Total recomputed from the parts and the weights of a TrainConfig."""
        return weighted_total(config, self.nce, self.prediction, self.entropy, self.diversity,
                              self.variance, self.reconstruction)

    def metrics_row(self, step, tau):
        return {
            'step': int(step),
            'total': self.total,
            'nce': self.nce,
            'pred': self.prediction,
            'ent': self.entropy,
            'div': self.diversity,
            'tau': float(tau),
            'slot_usage': [int(u) for u in self.slot_usage],
        }


def weighted_total(config, nce, prediction, entropy, diversity, variance=0.0, reconstruction=0.0):
    """
    nce_w * nce + pred_w * pred - beta * entropy - lambda * diversity + var_w * var + rec_w * rec.

    Works on floats and on Nodes.
    """
    if hasattr(nce, 'value'):
        terms = [
            ops.scale(nce, config.nce_weight),
            ops.scale(prediction, config.prediction_weight),
            ops.scale(entropy, -config.entropy_weight),
            ops.scale(diversity, -config.diversity_weight),
            ops.scale(variance, config.variance_weight),
            ops.scale(reconstruction, config.reconstruction_weight),
        ]
        total = terms[0]
        for term in terms[1:]:
            total = ops.add(total, term)
        return total
    return (config.nce_weight * nce + config.prediction_weight * prediction
            - config.entropy_weight * entropy - config.diversity_weight * diversity
            + config.variance_weight * variance + config.reconstruction_weight * reconstruction)
