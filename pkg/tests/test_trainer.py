"""
Tests for the trajectory buffer and the training loop.
"""
import itertools
import json
import os

import numpy as np
import pytest

from src.errors import NumericalAbort
from src.mappings.report_format import LOSS_CURVE_COLUMNS, METRICS_FIELDS
from src.nets.consciousness import ConsciousState
from src.nets.model import ConsciousnessModel
from src.tensor.autograd import backward, constant
from src.tensor.optim import AdamConfig, adam_step
from src.tensor.rng import SeededRng
from src.training.buffer import TrajectoryBuffer
from src.training.losses import prediction_loss
from src.training.trainer import (
    FINAL_CHECKPOINT,
    LOSS_CURVE_FILE,
    compute_losses,
    episode_stream,
    issue_time,
    temperature_at,
    train,
    train_step,
    window_inputs,
)
from src.utils.checkpoint import load_checkpoint
from src.utils.data_loader import load_csv
from tests.conftest import FULL_CHECKS_ENV, tiny_config


def windows_for(config, seed=0):
    buffer = TrajectoryBuffer(4, config.train.episode_length, config.env.grid_size)
    stream = episode_stream(config)
    for _ in range(4):
        buffer.add(next(stream).observations)
    windows, _, _ = buffer.sample_windows(SeededRng(seed), config.train.batch_size, config.train.window)
    return windows


class TestTrajectoryBuffer:
    """
    Test cases for the ring buffer.
    """

    def test_evicts_oldest(self):
        buffer = TrajectoryBuffer(2, 3, 2)
        for value in range(3):
            buffer.add(np.full((3, 2, 2), value))
        assert len(buffer) == 2
        assert buffer.cursor == 1
        windows, episodes, _ = buffer.sample_windows(SeededRng(0), 20, 3)
        assert set(np.unique(windows)) == {1, 2}

    def test_windows_stay_inside_one_episode(self):
        buffer = TrajectoryBuffer(3, 10, 1)
        for episode in range(3):
            buffer.add((episode * 10 + np.arange(10)).reshape(10, 1, 1))
        windows, episodes, starts = buffer.sample_windows(SeededRng(1), 50, 4)
        flat = windows.reshape(50, 4).astype(np.int64)
        np.testing.assert_array_equal(np.diff(flat, axis=1), 1)
        np.testing.assert_array_equal(flat[:, 0], episodes * 10 + starts)

    def test_rejects_wrong_length_and_empty_sampling(self):
        buffer = TrajectoryBuffer(2, 5, 2)
        with pytest.raises(ValueError):
            buffer.sample_windows(SeededRng(0), 1, 2)
        with pytest.raises(ValueError):
            buffer.add(np.zeros((4, 2, 2)))


class TestSchedule:
    """
    Test cases for the temperature schedule and issue time.
    """

    def test_temperature_decays_to_floor(self, config):
        assert temperature_at(config.net, 1) == pytest.approx(config.net.temperature_decay)
        assert temperature_at(config.net, 10 ** 6) == config.net.temperature_floor

    def test_issue_time_leaves_horizon(self, config):
        assert issue_time(config.train) == config.train.window - config.train.horizon - 1


class TestTrainStep:
    """
    Test cases for compute_losses and train_step.
    """

    def test_identical_calls_identical_params(self, config):
        windows = windows_for(config)
        results = []
        for _ in range(2):
            model = ConsciousnessModel(config)
            store = model.init_params(SeededRng(0).fork('init'))
            train_step(model, store, windows, SeededRng(5), 1.0, config, step=1)
            results.append(store)
        for name in results[0].names():
            assert results[0].value(name).tobytes() == results[1].value(name).tobytes()

    def test_breakdown_recomposes_total(self, config):
        model = ConsciousnessModel(config)
        store = model.init_params(SeededRng(0))
        breakdown = train_step(model, store, windows_for(config), SeededRng(1), 1.0, config, step=1)
        assert breakdown.total == pytest.approx(breakdown.recomposed(config.train))
        assert np.isfinite(breakdown.grad_norm)
        assert sum(breakdown.slot_usage) == config.train.batch_size * config.net.selected_slots

    def test_parameters_move(self, config):
        model = ConsciousnessModel(config)
        store = model.init_params(SeededRng(0))
        before = store.copy()
        train_step(model, store, windows_for(config), SeededRng(1), 1.0, config)
        changed = [n for n in store.trainable_names() if not np.array_equal(store.value(n), before.value(n))]
        assert any(n.startswith('f.') for n in changed)
        assert any(n.startswith('v.') for n in changed)

    def test_temporal_negatives_and_reconstruction(self):
        config = tiny_config(temporal_negatives=True, horizon=3, window=7, reconstruction_weight=0.5)
        model = ConsciousnessModel(config)
        store = model.init_params(SeededRng(0))
        inputs = window_inputs(windows_for(config), config.env.num_channels)
        out = compute_losses(model, store, inputs, SeededRng(2), 1.0, config)
        assert out.parts['reconstruction'].item() > 0
        assert np.isfinite(out.total.item())

    def test_non_finite_loss_aborts(self, config, monkeypatch):
        model = ConsciousnessModel(config)
        store = model.init_params(SeededRng(0))
        store.set_value('v.mlp.l2.b', np.array([np.nan]))
        windows = windows_for(config)
        with pytest.raises(NumericalAbort) as excinfo:
            train_step(model, store, windows, SeededRng(1), 1.0, config, step=7)
        assert excinfo.value.step == 7
        np.testing.assert_array_equal(excinfo.value.window, windows)


class TestTrain:
    """
    Test cases for the full loop and its output files.
    """

    def test_outputs(self, config, tmp_path):
        result = train(config, str(tmp_path))
        assert len(result.history) == config.train.total_steps
        with open(result.metrics_path, 'r', encoding='utf-8') as f:
            rows = [json.loads(line) for line in f]
        assert [r['step'] for r in rows] == list(range(1, config.train.total_steps + 1))
        assert list(rows[0]) == METRICS_FIELDS
        assert os.path.exists(tmp_path / "checkpoint_3.bin")
        assert os.path.exists(tmp_path / "checkpoint_6.bin")
        assert list(load_csv(tmp_path / LOSS_CURVE_FILE).columns) == LOSS_CURVE_COLUMNS
        final = load_checkpoint(tmp_path / FINAL_CHECKPOINT)
        assert final.names() == result.store.names()

    def test_metrics_stream_is_byte_identical(self, config, tmp_path):
        first = train(config, str(tmp_path / "a"), steps=3)
        second = train(config, str(tmp_path / "b"), steps=3)
        with open(first.metrics_path, 'rb') as a, open(second.metrics_path, 'rb') as b:
            assert a.read() == b.read()

    def test_hooks_called_on_log_steps(self, config, tmp_path):
        calls = []
        train(config, str(tmp_path), steps=4, hooks=[lambda step, store: calls.append(step)])
        assert calls == [2, 4]

    def test_zero_steps(self, config, tmp_path):
        result = train(config, str(tmp_path), steps=0)
        assert result.history == []
        assert result.checkpoints == []
        assert os.path.exists(tmp_path / FINAL_CHECKPOINT)


def synthetic_conscious_batch(config):
    """
    Every sign pattern of the first two coordinates of each B value, with the target bin a
    fixed function of them: positives among the first coordinates, plus 3 when every
    second coordinate is positive.
    """
    net = config.net
    k_b, width, slots = net.conditioning_slots, net.slot_width, net.slot_count
    signs = np.array(list(itertools.product([-1.0, 1.0], repeat=2 * k_b)))
    batch = len(signs)
    b_values = np.zeros((batch, k_b, width))
    b_values[:, :, :2] = signs.reshape(batch, k_b, 2)
    bins = (b_values[:, :, 0] > 0).sum(axis=1) + 3 * (b_values[:, :, 1] > 0).all(axis=1)
    c_t = ConsciousState(
        a_key=constant(np.ones((batch, net.key_dim))),
        a_value=constant(np.zeros((batch, width))),
        b_keys=constant(np.zeros((batch, k_b, net.key_dim))),
        b_values=constant(b_values),
        attention=constant(np.full((batch, slots), 1.0 / slots)),
        selection=constant(np.zeros((batch, slots))),
        role_probs=constant(np.full((batch, k_b + 1), 1.0 / (k_b + 1))),
        a_index=np.zeros(batch, dtype=np.int64),
        b_indices=np.tile(np.arange(1, k_b + 1), (batch, 1)),
        noise=np.zeros((batch, slots)),
        temperature=0.0,
    )
    return c_t, bins


def planted_share(config, out_dir, steps):
    """Fraction of batch rows whose selection includes the planted slot, over the last quarter of a run."""
    history = train(config, out_dir, steps=steps).history
    tail = history[-max(1, steps // 4):]
    picked = sum(row['slot_usage'][config.train.planted_slot] for row in tail)
    return picked / (len(tail) * config.train.batch_size)


full_size = pytest.mark.skipif(not os.environ.get(FULL_CHECKS_ENV),
                               reason=f"set {FULL_CHECKS_ENV}=1 for the full-size run")


class TestLearning:
    """
    Test cases for what training learns and how it starts.
    """

    def test_prediction_learns_function_of_b(self):
        config = tiny_config(entropy_weight=0.0, diversity_weight=0.0)
        model = ConsciousnessModel(config)
        store = model.init_params(SeededRng(0).fork('init'))
        c_t, bins = synthetic_conscious_batch(config)
        hyper = AdamConfig(lr=config.train.learning_rate)
        for _ in range(2000):
            loss = prediction_loss(model.predictor.predict(store, c_t).probs, bins)
            adam_step(store, backward(loss, store), hyper)
        assert prediction_loss(model.predictor.predict(store, c_t).probs, bins).item() < 0.3

    def test_nce_starts_near_uniform(self, config, tmp_path):
        history = train(config, str(tmp_path), steps=10).history
        mean_nce = np.mean([row['nce'] for row in history])
        assert abs(mean_nce - np.log(config.train.negatives + 1)) <= 0.5

    def test_regularizers_resist_planted_slot(self, tmp_path):
        steps = 200
        collapsed = planted_share(tiny_config(planted_slot=0, entropy_weight=0.0, diversity_weight=0.0),
                                  str(tmp_path / "off"), steps)
        regularized = planted_share(tiny_config(planted_slot=0), str(tmp_path / "on"), steps)
        assert collapsed > regularized

    @full_size
    def test_planted_slot_collapse_full_size(self, tmp_path):
        steps = 5000
        collapsed = planted_share(tiny_config(planted_slot=0, entropy_weight=0.0, diversity_weight=0.0),
                                  str(tmp_path / "off"), steps)
        regularized = planted_share(tiny_config(planted_slot=0), str(tmp_path / "on"), steps)
        assert collapsed > 0.8
        assert regularized < 0.5
