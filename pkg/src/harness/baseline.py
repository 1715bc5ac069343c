"""
Pixel-space baseline: a recurrent next-observation predictor over grid cells.

The baseline estimates a fall by sampling future frames and checking whether the pile's base
cell stops showing a block.
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.config import BLOCK, LEAN_LEFT, LEAN_RIGHT
from src.env.blocks import base_cell
from src.env.trajectory import fall_labels, one_hot
from src.harness.probes import auc_score
from src.nets.base import BaseNetwork
from src.nets.layers import dense, init_dense
from src.tensor import ops
from src.tensor.autograd import backward, constant, no_grad
from src.tensor.optim import AdamConfig, adam_step
from src.tensor.params import ParameterStore
from src.training.buffer import TrajectoryBuffer

log = logging.getLogger(__name__)

_PILE_CHANNELS = (BLOCK, LEAN_LEFT, LEAN_RIGHT)


class PixelBaseline(BaseNetwork):
    """
    [s_t, z_{t-1}] -> tanh hidden -> (z_t, per-cell channel logits for s_{t+1}).
    """

    prefix = 'pix'

    def __init__(self, config):
        super().__init__(config)
        self.harness = config.harness
        self.cells = self.env.grid_size * self.env.grid_size

    def init_params(self, store, rng):
        latent, hidden, obs_dim = self.harness.baseline_latent, self.harness.baseline_hidden, self.env.obs_dim
        init_dense(store, 'pix.hid', rng, obs_dim + latent, hidden)
        init_dense(store, 'pix.lat', rng, hidden, latent)
        init_dense(store, 'pix.out', rng, hidden, obs_dim)

    def initial_latent(self, batch):
        return constant(np.zeros((batch, self.harness.baseline_latent)))

    def step(self, store, obs, latent):
        """
        Returns:
            tuple: (logits Node (B, cells, C), next latent Node (B, L))
        """
        batch = latent.value.shape[0]
        hidden = ops.tanh(dense(store, 'pix.hid', ops.concat([obs, latent], axis=1)))
        next_latent = ops.tanh(dense(store, 'pix.lat', hidden))
        logits = ops.reshape(dense(store, 'pix.out', hidden), (batch, self.cells, self.env.num_channels))
        return logits, next_latent

    def cell_probs(self, logits):
        """Per-cell channel distributions; each (batch, cell) row sums to 1."""
        return ops.softmax(logits, axis=2)


@dataclass
class BaselineModel:
    network: PixelBaseline
    store: ParameterStore
    losses: List[float] = field(default_factory=list)


def baseline_loss(network, store, windows, num_channels):
    """Mean next-frame cross-entropy over a batch of (B, T, G, G) channel windows."""
    batch, length = windows.shape[:2]
    inputs = one_hot(windows, num_channels).reshape(batch, length, -1)
    latent = network.initial_latent(batch)
    total = None
    for t in range(length - 1):
        logits, latent = network.step(store, inputs[:, t], latent)
        flat = ops.reshape(logits, (batch * network.cells, num_channels))
        loss = ops.cross_entropy(flat, windows[:, t + 1].reshape(-1))
        total = loss if total is None else ops.add(total, loss)
    return ops.scale(total, 1.0 / (length - 1))


def train_baseline(config, episodes, rng, steps=None):
    """
    Train the pixel baseline on the given episodes.

    Args:
        config (LabConfig): Run config.
        episodes (iterable): Channel-grid arrays (T, G, G) of the episodes the conscious model
            was trained on.
        rng (SeededRng): Initialisation and window sampling.
        steps (int, optional): Override of ``baseline_steps``.

    Returns:
        BaselineModel: Trained network and its loss history.
    """
    harness = config.harness
    episodes = [np.asarray(e) for e in episodes]
    network = PixelBaseline(config)
    store = ParameterStore()
    network.init_params(store, rng.fork('init'))

    buffer = TrajectoryBuffer(len(episodes), episodes[0].shape[0], config.env.grid_size)
    for observations in episodes:
        buffer.add(observations)

    sample_rng = rng.fork('windows')
    hyper = AdamConfig(lr=harness.baseline_lr)
    model = BaselineModel(network=network, store=store)
    total_steps = harness.baseline_steps if steps is None else steps
    for step in range(1, total_steps + 1):
        windows, _, _ = buffer.sample_windows(sample_rng, harness.baseline_batch, harness.baseline_window)
        loss = baseline_loss(network, store, windows, config.env.num_channels)
        adam_step(store, backward(loss, store), hyper)
        model.losses.append(loss.item())
        if step % config.train.log_every == 0:
            log.info("baseline step %d: next-frame loss %.4f", step, loss.item())
    return model


def sample_cells(probs, rng):
    """
    Sample one channel per cell.

    Args:
        probs (numpy.ndarray): (N, cells, C) distributions.

    Returns:
        numpy.ndarray: (N, cells) channel ids.
    """
    cumulative = np.cumsum(probs, axis=2)
    u = rng.uniform(probs.shape[:2] + (1,))
    return np.minimum((u > cumulative).sum(axis=2), probs.shape[2] - 1)


def rollout_fall_scores(model, trajectories, horizon, rng, rollouts):
    """
    Fraction of sampled rollouts in which each pile's base cell stops showing a block.

    Args:
        model (BaselineModel): Trained baseline.
        trajectories (list): Trajectory objects of equal length.
        horizon (int): Rollout length K.
        rng (SeededRng): Sampling randomness.
        rollouts (int): Rollouts per (episode, time).

    Returns:
        numpy.ndarray: (E, T, P) scores; NaN where t + K runs past the episode.
    """
    network, store = model.network, model.store
    env = network.env
    channels = np.stack([traj.observations for traj in trajectories])
    episodes, length = channels.shape[:2]
    inputs = one_hot(channels, env.num_channels).reshape(episodes, length, -1)
    base = np.array([r * env.grid_size + c for r, c in (base_cell(env, p) for p in range(env.pile_count))])
    scores = np.full((episodes, length, env.pile_count), np.nan)

    with no_grad():
        latent = network.initial_latent(episodes)
        for t in range(length - horizon):
            logits, latent = network.step(store, inputs[:, t], latent)
            roll_latent = constant(np.repeat(latent.value, rollouts, axis=0))
            probs = np.repeat(network.cell_probs(logits).value, rollouts, axis=0)
            fell = np.zeros((episodes * rollouts, env.pile_count), dtype=bool)
            for k in range(horizon):
                frame = sample_cells(probs, rng)
                fell |= ~np.isin(frame[:, base], _PILE_CHANNELS)
                if k + 1 < horizon:
                    logits_k, roll_latent = network.step(store, one_hot(frame, env.num_channels).reshape(len(frame), -1),
                                                         roll_latent)
                    probs = network.cell_probs(logits_k).value
            scores[:, t] = fell.reshape(episodes, rollouts, env.pile_count).mean(axis=1)
    return scores


def eval_baseline(model, trajectories, horizon, rng, rollouts=32):
    """
    Fall-prediction AUC of the baseline, averaged over piles.

    Returns:
        tuple: (mean AUC, per-pile AUCs list, (E, T, P) scores)
    """
    scores = rollout_fall_scores(model, trajectories, horizon, rng, rollouts)
    per_pile = []
    for pile in range(model.network.env.pile_count):
        labels, valid = zip(*(fall_labels(traj, pile, horizon) for traj in trajectories))
        labels, valid = np.stack(labels), np.stack(valid)
        try:
            per_pile.append(auc_score(labels[valid], scores[:, :, pile][valid]))
        except ValueError as e:
            log.warning("Baseline AUC for pile %d undefined: %s", pile, e)
    auc = float(np.mean(per_pile)) if per_pile else float('nan')
    return auc, per_pile, scores
