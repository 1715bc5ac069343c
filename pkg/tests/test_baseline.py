"""
Tests for the pixel-space baseline.
"""
import numpy as np
import pytest

from src.harness.baseline import (
    PixelBaseline,
    baseline_loss,
    eval_baseline,
    rollout_fall_scores,
    sample_cells,
    train_baseline,
)
from src.harness.evaluation import eval_trajectories
from src.tensor.gradcheck import grad_check_store
from src.tensor.params import ParameterStore
from src.tensor.rng import SeededRng
from src.training.trainer import episode_stream


@pytest.fixture
def episodes(config):
    stream = episode_stream(config)
    return [next(stream).observations for _ in range(3)]


@pytest.fixture
def baseline(config, episodes):
    return train_baseline(config, episodes, SeededRng(0))


class TestPixelBaseline:
    """
    Test cases for the next-frame network.
    """

    def test_cell_distributions(self, config):
        network = PixelBaseline(config)
        store = ParameterStore()
        network.init_params(store, SeededRng(0))
        obs = np.zeros((2, config.env.obs_dim))
        logits, latent = network.step(store, obs, network.initial_latent(2))
        cells = config.env.grid_size ** 2
        assert logits.shape == (2, cells, config.env.num_channels)
        assert latent.shape == (2, config.harness.baseline_latent)
        np.testing.assert_allclose(network.cell_probs(logits).value.sum(axis=2), 1.0)

    def test_loss_gradient(self, config, episodes):
        network = PixelBaseline(config)
        store = ParameterStore()
        network.init_params(store, SeededRng(1))
        windows = np.stack([e[:3] for e in episodes])
        error = grad_check_store(lambda s: baseline_loss(network, s, windows, config.env.num_channels), store,
                                 coords_per_entry=3, rng=SeededRng(2))
        assert error < 1e-5

    def test_training_records_losses(self, config, baseline):
        assert len(baseline.losses) == config.harness.baseline_steps
        assert all(np.isfinite(baseline.losses))

    def test_training_is_deterministic(self, config, episodes, baseline):
        again = train_baseline(config, episodes, SeededRng(0))
        assert again.losses == baseline.losses


class TestBaselineEvaluation:
    """
    Test cases for sampled rollouts and their AUC.
    """

    def test_sample_cells_follows_certain_distributions(self):
        probs = np.zeros((2, 3, 4))
        probs[:, 0, 2] = probs[:, 1, 0] = probs[:, 2, 3] = 1.0
        np.testing.assert_array_equal(sample_cells(probs, SeededRng(0)), [[2, 0, 3], [2, 0, 3]])

    def test_rollout_scores(self, config, baseline):
        trajectories = eval_trajectories(config, 0, count=2)
        horizon = config.train.horizon
        scores = rollout_fall_scores(baseline, trajectories, horizon, SeededRng(1), rollouts=3)
        length = config.train.episode_length
        assert scores.shape == (2, length, config.env.pile_count)
        assert np.all(np.isnan(scores[:, length - horizon:]))
        inside = scores[:, :length - horizon]
        assert np.all((inside >= 0) & (inside <= 1))

    def test_eval_baseline(self, config, baseline):
        trajectories = eval_trajectories(config, 0, count=4)
        auc, per_pile, scores = eval_baseline(baseline, trajectories, config.train.horizon, SeededRng(2), rollouts=2)
        assert len(per_pile) <= config.env.pile_count
        assert np.isnan(auc) or 0.0 <= auc <= 1.0
