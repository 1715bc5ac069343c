"""
Finite-difference verification of analytic gradients.
"""
import logging

import numpy as np

from src.tensor.autograd import backward, no_grad, variable

log = logging.getLogger(__name__)


def _relative_error(analytic, numeric):
    if not np.isfinite(analytic):
        return np.inf
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def grad_check(function, point, step=1e-6):
    """
    Compare backward() against central differences at a point.

    Args:
        function (callable): Takes a list of nodes, returns a scalar node.
        point (list of numpy.ndarray): Input values.
        step (float): Finite-difference step in (0, 1e-3].

    Returns:
        float: max over coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|);
        ``inf`` when the analytic gradient is not finite.
    """
    if not 0.0 < step <= 1e-3:
        raise ValueError(f"grad_check: step {step} must lie in (0, 1e-3]")
    point = [np.array(p, dtype=np.float64) for p in point]
    inputs = [variable(p) for p in point]
    backward(function(inputs))
    analytic = [n.grad if n.grad is not None else np.zeros_like(n.value) for n in inputs]

    worst = 0.0
    for index, base in enumerate(point):
        for coord in np.ndindex(base.shape):
            shifted = [p.copy() for p in point]
            with no_grad():
                shifted[index][coord] = base[coord] + step
                upper = function([variable(p) for p in shifted]).item()
                shifted[index][coord] = base[coord] - step
                lower = function([variable(p) for p in shifted]).item()
            numeric = (upper - lower) / (2.0 * step)
            worst = max(worst, _relative_error(analytic[index][coord], numeric))
    return worst


def grad_check_store(loss_fn, store, step=1e-6, names=None, coords_per_entry=None, rng=None):
    """
    Compare backward() against central differences for parameters of a store.

    Args:
        loss_fn (callable): Takes the store, returns a scalar node built from ``store.node``.
        store (ParameterStore): Parameters; values are restored after each perturbation.
        step (float): Finite-difference step.
        names (list, optional): Entries to check (default: every trainable entry).
        coords_per_entry (int, optional): Check this many randomly chosen coordinates per
            entry instead of all of them.
        rng (SeededRng, optional): Chooses the sampled coordinates.

    Returns:
        float: Max relative error over the checked coordinates.
    """
    if not 0.0 < step <= 1e-3:
        raise ValueError(f"grad_check: step {step} must lie in (0, 1e-3]")
    names = names or store.trainable_names()
    grads = backward(loss_fn(store), store)

    worst = 0.0
    for name in names:
        base = store.value(name).copy()
        coords = list(np.ndindex(base.shape))
        if coords_per_entry is not None and len(coords) > coords_per_entry:
            if rng is None:
                picks = range(coords_per_entry)
            else:
                picks = rng.choice(len(coords), size=coords_per_entry, replace=False)
            coords = [coords[i] for i in picks]
        for coord in coords:
            shifted = base.copy()
            with no_grad():
                shifted[coord] = base[coord] + step
                store.set_value(name, shifted)
                upper = loss_fn(store).item()
                shifted[coord] = base[coord] - step
                store.set_value(name, shifted)
                lower = loss_fn(store).item()
            store.set_value(name, base)
            numeric = (upper - lower) / (2.0 * step)
            error = _relative_error(grads[name][coord], numeric)
            if error > worst:
                log.debug("grad_check %s%s: analytic %.3e numeric %.3e", name, coord, grads[name][coord], numeric)
            worst = max(worst, error)
    return worst
