"""
Adam optimiser over a ParameterStore.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(store, grads, hyper):
    """
    Apply one bias-corrected Adam update in place.

    Args:
        store (ParameterStore): Parameters and their moments.
        grads (dict): name -> gradient array. Entries without a gradient are left untouched.
        hyper (AdamConfig): Learning rate, betas and epsilon.

    Returns:
        ParameterStore: The same store, updated.
    """
    for name in store.trainable_names():
        grad = grads.get(name)
        if grad is None:
            continue
        entry = store.entry(name)
        entry.step += 1
        entry.m = hyper.beta1 * entry.m + (1.0 - hyper.beta1) * grad
        entry.v = hyper.beta2 * entry.v + (1.0 - hyper.beta2) * grad * grad
        m_hat = entry.m / (1.0 - hyper.beta1 ** entry.step)
        v_hat = entry.v / (1.0 - hyper.beta2 ** entry.step)
        entry.value = entry.value - hyper.lr * m_hat / (np.sqrt(v_hat) + hyper.eps)
    return store
