"""
Training loop: unroll F over a window, think at the issue time, score the future, update.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from src.env.trajectory import one_hot, sample_trajectory
from src.errors import NumericalAbort
from src.mappings.report_format import LOSS_CURVE_COLUMNS
from src.nets.model import ConsciousnessModel, slot_readouts
from src.tensor import ops
from src.tensor.autograd import backward
from src.tensor.optim import AdamConfig, adam_step
from src.tensor.rng import SeededRng
from src.training.buffer import TrajectoryBuffer
from src.training.losses import (
    LossBreakdown,
    diversity_regularizer,
    entropy_regularizer,
    in_batch_negatives,
    nce_loss,
    prediction_loss,
    reconstruction_loss,
    slot_usage_frequencies,
    variance_floor_penalty,
    weighted_total,
)
from src.utils.checkpoint import save_checkpoint
from src.utils.data_loader import save_csv

log = logging.getLogger(__name__)

METRICS_FILE = 'metrics.jsonl'
LOSS_CURVE_FILE = 'loss_curve.csv'
FINAL_CHECKPOINT = 'final.bin'


def temperature_at(net_config, step):
    """max(floor, tau0 * decay ** step)."""
    return max(net_config.temperature_floor, net_config.temperature * net_config.temperature_decay ** step)


def issue_time(train_config, window=None):
    """Index in the window at which the conscious state issues its prediction."""
    window = train_config.window if window is None else window
    return window - train_config.horizon - 1


def window_inputs(windows, num_channels):
    """(B, T, G, G) channel grids -> (B, T, G*G*C) one-hot inputs."""
    windows = np.asarray(windows)
    return one_hot(windows, num_channels).reshape(windows.shape[0], windows.shape[1], -1)


def episode_stream(config):
    """
    Episodes of the run's environment stream, in order.

    The trainer and the pixel baseline both draw from this stream, so they see the same
    trajectories for the same seed.
    """
    rng = SeededRng(config.train.seed).fork('env')
    while True:
        yield sample_trajectory(config.env, rng, config.train.episode_length)


@dataclass
class StepOutputs:
    """Graph nodes of one loss evaluation."""
    total: object
    parts: dict
    states: list
    conscious: object
    prediction: object
    bins: np.ndarray
    previous: object = None


def compute_losses(model, store, inputs, rng, temperature, config, selections=None, roles=None,
                   straight_through=True, update_stats=True):
    """
    Build the full training objective for a batch of windows.

    Args:
        model (ConsciousnessModel): Networks.
        store (ParameterStore): Parameters.
        inputs (numpy.ndarray): (B, T_w, obs_dim) one-hot observations.
        rng (SeededRng): Noise for the two conscious steps.
        temperature (float): Selection noise scale.
        config (LabConfig): Run config.
        selections (tuple, optional): Fixed (previous, current) slot selections.
        roles (tuple, optional): Fixed (previous, current) A positions.
        straight_through (bool): Passed to the conscious steps.
        update_stats (bool): Move the running readout range after binning the targets.

    Returns:
        StepOutputs: The total loss node and its parts.
    """
    train = config.train
    horizon = train.horizon
    batch, length = inputs.shape[:2]
    t = issue_time(train, length)
    selections = selections or (None, None)
    roles = roles or (None, None)

    states = model.unroll(store, inputs)
    c_prev = None
    if t >= 1:
        c_prev, _ = model.think(store, states[t - 1], None, rng, temperature, selection=selections[0],
                                a_positions=roles[0], straight_through=straight_through)
    c_t, prediction = model.think(store, states[t], c_prev, rng, temperature, selection=selections[1],
                                  a_positions=roles[1], straight_through=straight_through)

    h_future = states[t + horizon]
    # Targets are plain arrays: no gradient flows through them
    bins = model.binner.assign(store, slot_readouts(h_future.value, c_t.a_index))
    if update_stats:
        model.binner.update(store, slot_readouts(h_future.value))

    matrix = model.verifier.verify_matrix(store, h_future, c_t, prediction)
    positives, negatives = in_batch_negatives(matrix, train.negatives)
    if train.temporal_negatives and horizon > 1:
        shuffled = [ops.reshape(model.verifier.verify(store, states[s], c_t, prediction), (batch, 1))
                    for s in range(t + 1, t + horizon)]
        negatives = ops.concat([negatives] + shuffled, axis=1)

    parts = {
        'nce': nce_loss(positives, negatives),
        'prediction': prediction_loss(prediction.probs, bins),
        'entropy': entropy_regularizer(c_t.attention),
        'diversity': diversity_regularizer(slot_usage_frequencies(c_t.selection)),
        'variance': variance_floor_penalty(ops.reshape(states[t], (batch, -1)), train.variance_floor),
        'reconstruction': 0.0,
    }
    if train.reconstruction_weight > 0:
        parts['reconstruction'] = reconstruction_loss(
            model.representation.reconstruct(store, states[t]), inputs[:, t])
    total = weighted_total(train, **parts)
    return StepOutputs(total=total, parts=parts, states=states, conscious=c_t, prediction=prediction, bins=bins,
                       previous=c_prev)


def _scalar(part):
    return part.item() if hasattr(part, 'item') else float(part)


def train_step(model, store, windows, rng, temperature, config, step=None):
    """
    One optimisation step on a batch of windows.

    Args:
        model (ConsciousnessModel): Networks.
        store (ParameterStore): Parameters, updated in place.
        windows (numpy.ndarray): (B, T_w, G, G) channel grids.
        rng (SeededRng): Selection noise.
        temperature (float): Current temperature.
        config (LabConfig): Run config.
        step (int, optional): Step number for diagnostics.

    Returns:
        LossBreakdown: Losses before the update.

    Raises:
        NumericalAbort: If the loss or its gradient is not finite.
    """
    inputs = window_inputs(windows, config.env.num_channels)
    out = compute_losses(model, store, inputs, rng, temperature, config)
    total = out.total.item()
    if not np.isfinite(total):
        raise NumericalAbort(f"non-finite loss {total} at step {step}", window=np.asarray(windows), step=step)

    grads = backward(out.total, store)
    grad_norm = float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))
    if not np.isfinite(grad_norm):
        raise NumericalAbort(f"non-finite gradient norm at step {step}", window=np.asarray(windows), step=step)

    train = config.train
    adam_step(store, grads, AdamConfig(lr=train.learning_rate, beta1=train.beta1,
                                       beta2=train.beta2, eps=train.adam_eps))

    c_t = out.conscious
    usage = np.bincount(c_t.selected_slots().reshape(-1), minlength=config.net.slot_count)
    attention = c_t.attention.value
    attention_entropy = float(np.mean(-np.sum(attention * np.log(np.clip(attention, 1e-300, None)), axis=1)))
    return LossBreakdown(
        total=total,
        nce=_scalar(out.parts['nce']),
        prediction=_scalar(out.parts['prediction']),
        entropy=_scalar(out.parts['entropy']),
        diversity=_scalar(out.parts['diversity']),
        variance=_scalar(out.parts['variance']),
        reconstruction=_scalar(out.parts['reconstruction']),
        attention_entropy=attention_entropy,
        slot_usage=usage.tolist(),
        grad_norm=grad_norm,
    )


@dataclass
class TrainResult:
    model: ConsciousnessModel
    store: object
    history: List[dict] = field(default_factory=list)
    metrics_path: str = ''
    checkpoint_path: str = ''
    checkpoints: List[str] = field(default_factory=list)


def train(config, out_dir, steps=None, hooks=()):
    """
    Train a model from scratch.

    Fills the buffer from the environment stream, adds a fresh episode every
    ``refresh_every`` steps, anneals the temperature, writes one metrics row per step and
    checkpoints every ``checkpoint_every`` steps and at the end.

    Args:
        config (LabConfig): Run config.
        out_dir (str): Output directory.
        steps (int, optional): Override of ``config.train.total_steps``.
        hooks (iterable): Callables ``hook(step, store)`` run every ``log_every`` steps.

    Returns:
        TrainResult: Trained store and output paths.

    Raises:
        NumericalAbort: Propagated from ``train_step``.
    """
    train_cfg = config.train
    total_steps = train_cfg.total_steps if steps is None else steps
    root = SeededRng(train_cfg.seed)
    init_rng, train_rng = root.fork('init'), root.fork('train')

    model = ConsciousnessModel(config)
    store = model.init_params(init_rng)
    episodes = episode_stream(config)
    buffer = TrajectoryBuffer(train_cfg.buffer_capacity, train_cfg.episode_length, config.env.grid_size)
    for _ in range(min(train_cfg.buffer_capacity, train_cfg.batch_size)):
        buffer.add(next(episodes).observations)
    log.info("Buffer filled with %d episodes; training for %d steps", len(buffer), total_steps)

    os.makedirs(out_dir, exist_ok=True)
    result = TrainResult(model=model, store=store, metrics_path=os.path.join(out_dir, METRICS_FILE))
    with open(result.metrics_path, 'w', encoding='utf-8') as metrics:
        for step in range(1, total_steps + 1):
            if step % train_cfg.refresh_every == 0:
                buffer.add(next(episodes).observations)
            tau = temperature_at(config.net, step)
            windows, _, _ = buffer.sample_windows(train_rng, train_cfg.batch_size, train_cfg.window)
            breakdown = train_step(model, store, windows, train_rng, tau, config, step)

            row = breakdown.metrics_row(step, tau)
            metrics.write(json.dumps(row) + '\n')
            result.history.append(row)

            if step % train_cfg.log_every == 0:
                log.info("step %d: total %.4f nce %.4f pred %.4f ent %.4f div %.4f tau %.3f",
                         step, row['total'], row['nce'], row['pred'], row['ent'], row['div'], tau)
                for hook in hooks:
                    hook(step, store)
            if step % train_cfg.checkpoint_every == 0:
                result.checkpoints.append(
                    save_checkpoint(store, os.path.join(out_dir, f"checkpoint_{step}.bin")))

    result.checkpoint_path = save_checkpoint(store, os.path.join(out_dir, FINAL_CHECKPOINT))
    write_loss_curve(result.history, os.path.join(out_dir, LOSS_CURVE_FILE))
    return result


def write_loss_curve(history, path):
    frame = pd.DataFrame(history, columns=list(history[0]) if history else LOSS_CURVE_COLUMNS)
    return save_csv(frame[LOSS_CURVE_COLUMNS], path)
