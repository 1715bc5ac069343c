"""
Noise and discrete selection helpers for the attention bottleneck.
"""
import numpy as np

# Uniform draws are clamped here before the double log
UNIFORM_CLAMP = 1e-12


def gumbel_sample(rng, shape):
    """
    Draw i.i.d. standard Gumbel(0, 1) noise as -log(-log(u)).

    Args:
        rng (SeededRng): Noise source.
        shape (tuple): Output shape.

    Returns:
        numpy.ndarray: float64 draws.
    """
    u = np.clip(rng.uniform(shape), UNIFORM_CLAMP, 1.0 - UNIFORM_CLAMP)
    return -np.log(-np.log(u))


def top_k(scores, k):
    """
    Indices of the k largest scores, in descending score order; ties go to the lower index.

    Args:
        scores (array-like): 1-D scores.
        k (int): Number of indices, 1 <= k <= len(scores).

    Returns:
        numpy.ndarray: k distinct int64 indices.

    Raises:
        ValueError: If k is not in [1, len(scores)].
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if k < 1 or k > scores.size:
        raise ValueError(f"top_k: k={k} must be in [1, {scores.size}]")
    return np.argsort(-scores, kind='stable')[:k].astype(np.int64)


def top_k_rows(scores, k):
    """Apply ``top_k`` to every row of a 2-D score matrix."""
    scores = np.asarray(scores, dtype=np.float64)
    if k < 1 or k > scores.shape[1]:
        raise ValueError(f"top_k: k={k} must be in [1, {scores.shape[1]}]")
    return np.argsort(-scores, axis=1, kind='stable')[:, :k].astype(np.int64)
