"""
Finite-difference checks of every network through the full unrolled objective.
"""
import logging
from dataclasses import replace

import numpy as np
import pandas as pd

from src.env.trajectory import sample_trajectory
from src.mappings.report_format import GRADCHECK_COLUMNS
from src.nets.consciousness import KEY_TABLE
from src.nets.model import ConsciousnessModel
from src.tensor.gradcheck import grad_check_store
from src.tensor.rng import SeededRng
from src.training.trainer import compute_losses, window_inputs

log = logging.getLogger(__name__)

GRADCHECK_STEP = 1e-6
GRADCHECK_BATCH = 4
GRADCHECK_COORDS = 3


COMPONENTS = ('representation', 'consciousness', 'predictor', 'verifier', 'full')


def component_names(store, component):
    if component == 'full':
        return list(store.trainable_names())
    if component == 'consciousness':
        return [n for n in store.trainable_names() if n.startswith('c.') or n == KEY_TABLE]
    prefix = {'representation': 'f.', 'predictor': 'p.', 'verifier': 'v.'}[component]
    return [n for n in store.trainable_names() if n.startswith(prefix)]


def smooth_objective(model, config, inputs, seed, temperature=1.0):
    """
    The training loss with the slot selection and roles pinned to one noisy draw.

    With the selection fixed and straight-through disabled the objective is smooth in every
    parameter, so central differences and backward() must agree.

    Returns:
        callable: store -> scalar loss node.
    """
    def draw(store):
        return compute_losses(model, store, inputs, SeededRng(seed).fork('noise'), temperature, config,
                              update_stats=False)

    def objective(store, pinned):
        out = compute_losses(model, store, inputs, SeededRng(seed).fork('noise'), temperature, config,
                             selections=pinned[0], roles=pinned[1], straight_through=False,
                             update_stats=False)
        return out.total

    def build(store):
        first = draw(store)
        zeros = np.zeros(inputs.shape[0], dtype=np.int64)
        previous = first.previous.selected_slots() if first.previous is not None else None
        pinned = ((previous, first.conscious.selected_slots()), (zeros if previous is not None else None, zeros))
        return lambda s: objective(s, pinned)

    return build


def _check_point(config, rng, coords_per_entry, batch):
    """Max relative error per component for one parameter draw and one batch of windows."""
    model = ConsciousnessModel(config)
    store = model.init_params(rng.fork('init'))

    train = config.train
    episode = sample_trajectory(config.env, rng.fork('env'), max(train.window, batch + train.window))
    windows = np.stack([episode.observations[i:i + train.window] for i in range(batch)])
    inputs = window_inputs(windows, config.env.num_channels)
    # Every row needs at least one negative
    if train.negatives > batch - 1:
        config = replace(config, train=replace(train, negatives=batch - 1))

    loss_fn = smooth_objective(model, config, inputs, rng.seed)(store)
    errors = {}
    for component in COMPONENTS:
        names = component_names(store, component)
        errors[component] = (grad_check_store(loss_fn, store, GRADCHECK_STEP, names=names,
                                              coords_per_entry=coords_per_entry,
                                              rng=rng.fork(f"coords-{component}")),
                             sum(min(coords_per_entry, store.value(n).size) for n in names))
    return errors


def run_gradcheck(config, seed, points=None, coords_per_entry=GRADCHECK_COORDS, batch=GRADCHECK_BATCH):
    """
    Check F, C (smooth fixed-selection path), the predictor and the verifier at random points.

    Each point is a fresh parameter initialisation with its own batch of windows.

    Args:
        config (LabConfig): Run config.
        seed (int): Initialisation, data and coordinate seed.
        points (int, optional): Random points (default ``harness.gradcheck_points``).
        coords_per_entry (int): Coordinates sampled per parameter entry at each point.
        batch (int): Windows in the check batch.

    Returns:
        pandas.DataFrame: columns component, points, max_error, coordinates.
    """
    points = config.harness.gradcheck_points if points is None else points
    rng = SeededRng(seed)
    worst = {component: 0.0 for component in COMPONENTS}
    checked = {component: 0 for component in COMPONENTS}
    for index in range(points):
        results = _check_point(config, rng.fork(f"point-{index}"), coords_per_entry, batch)
        for component, (error, coordinates) in results.items():
            worst[component] = max(worst[component], error)
            checked[component] += coordinates
        log.debug("gradcheck point %d/%d done", index + 1, points)

    rows = []
    for component in COMPONENTS:
        log.info("gradcheck %s: max relative error %.3e over %d points", component, worst[component], points)
        rows.append({'component': component, 'points': points, 'max_error': worst[component],
                     'coordinates': checked[component]})
    return pd.DataFrame(rows, columns=GRADCHECK_COLUMNS)
