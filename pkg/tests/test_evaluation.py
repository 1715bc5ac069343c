"""
Tests for model rollouts, the evaluation report, its output files and the gradient diagnostics.
"""
import json

import numpy as np
import pytest

from src.harness.baseline import train_baseline
from src.harness.diagnostics import COMPONENTS, component_names, run_gradcheck
from src.harness.evaluation import EvalReport, eval_trajectories, evaluate, rollout_model
from src.harness.report import summarize, write_eval_outputs
from src.mappings.report_format import AUC_BY_SEED_COLUMNS, GRADCHECK_COLUMNS, MI_MATRIX_COLUMNS
from src.nets.model import ConsciousnessModel
from src.tensor.rng import SeededRng
from src.training.trainer import episode_stream
from src.utils.data_loader import load_csv


@pytest.fixture
def model_and_store(config):
    model = ConsciousnessModel(config)
    return model, model.init_params(SeededRng(0).fork('init'))


def stub_report(seed, conscious, oracle=0.9, baseline=None):
    return EvalReport(seed=seed, conscious_auc=conscious, full_h_auc=0.7, random_auc=0.55, oracle_auc=oracle,
                      verifier_auc=0.6, baseline_auc=baseline,
                      mi=[{'slot': 0, 'factor': 'pile0.height', 'mi': 0.1 * (seed + 1), 'n': 100}])


class TestRollout:
    """
    Test cases for eval_trajectories and rollout_model.
    """

    def test_eval_trajectories_deterministic(self, config):
        first = eval_trajectories(config, 3, count=2)
        second = eval_trajectories(config, 3, count=2)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.observations, b.observations)
        assert len(eval_trajectories(config, 3)) == config.harness.eval_episodes

    def test_rollout_shapes(self, config, model_and_store):
        model, store = model_and_store
        trajectories = eval_trajectories(config, 0, count=2)
        horizon = config.train.horizon
        rollout = rollout_model(model, store, trajectories, horizon, SeededRng(1))
        length, net = config.train.episode_length, config.net
        assert rollout.h.shape == (2, length, net.slot_count, net.slot_width)
        assert rollout.b_indices.shape == (2, length, net.conditioning_slots)
        assert rollout.probs.shape == (2, length, net.value_bins)
        assert len(rollout.statements) == 2 * length
        assert np.all(np.isnan(rollout.verifier[:, length - horizon:]))
        assert np.all(rollout.resolved_bins[:, length - horizon:] == -1)
        assert np.all(rollout.resolved_bins[:, :length - horizon] >= 0)

    def test_statements_resolve_inside_episode(self, config, model_and_store):
        model, store = model_and_store
        trajectories = eval_trajectories(config, 0, count=1)
        rollout = rollout_model(model, store, trajectories, config.train.horizon, SeededRng(1))
        unresolved = [s for s in rollout.statements if not s.resolved]
        assert len(unresolved) == config.train.horizon


class TestEvaluate:
    """
    Test cases for evaluate on a fresh model.
    """

    def test_report_sources(self, config, model_and_store):
        model, store = model_and_store
        stream = episode_stream(config)
        baseline = train_baseline(config, [next(stream).observations for _ in range(2)], SeededRng(4), steps=2)
        trajectories = eval_trajectories(config, 0)
        report, rollout = evaluate(config, model, store, trajectories, 0, baseline=baseline)
        sources = [row['source'] for row in report.auc_rows()]
        assert sources == ['conscious', 'full_h', 'random_slots', 'baseline', 'oracle', 'verifier_statements']
        assert len(report.random_slots) == config.net.selected_slots
        assert report.statements_resolved + report.statements_unresolved == len(rollout.statements)
        assert report.n_samples > 0

    def test_same_seed_same_report(self, config, model_and_store):
        model, store = model_and_store
        trajectories = eval_trajectories(config, 1, count=3)
        first, _ = evaluate(config, model, store, trajectories, 1)
        second, _ = evaluate(config, model, store, trajectories, 1)
        assert first.random_slots == second.random_slots
        assert first.probes == second.probes

    def test_ceiling_violations(self):
        assert stub_report(0, conscious=0.95).ceiling_violations() == ['conscious']
        assert stub_report(0, conscious=0.91).ceiling_violations() == []


class TestReportOutputs:
    """
    Test cases for summarize and write_eval_outputs.
    """

    def test_summary_averages_seeds(self):
        summary = summarize([stub_report(0, 0.6), stub_report(1, 0.8)])
        assert summary['conscious'] == pytest.approx(0.7)
        assert 'baseline' not in summary

    def test_files(self, tmp_path):
        reports = [stub_report(0, 0.6, baseline=0.5), stub_report(1, 0.8, baseline=0.52)]
        paths = write_eval_outputs(str(tmp_path), reports)
        assert set(paths) == {'report', 'auc_by_seed', 'mi_matrix'}
        auc = load_csv(paths['auc_by_seed'])
        assert list(auc.columns) == AUC_BY_SEED_COLUMNS
        assert len(auc) == 12
        mi = load_csv(paths['mi_matrix'])
        assert list(mi.columns) == MI_MATRIX_COLUMNS
        assert mi['mi'].iloc[0] == pytest.approx(0.15)
        with open(paths['report'], 'r', encoding='utf-8') as f:
            payload = json.load(f)
        assert payload['seeds'] == [0, 1]
        assert payload['mean_auc']['baseline'] == pytest.approx(0.51)


class TestGradcheck:
    """
    Test cases for the composed-network gradient diagnostics.
    """

    def test_component_names_partition(self, model_and_store):
        _, store = model_and_store
        full = set(component_names(store, 'full'))
        parts = [set(component_names(store, c)) for c in COMPONENTS[:-1]]
        assert set().union(*parts) == full
        assert all(not name.startswith('stats.') for name in full)

    def test_run_gradcheck(self, config):
        frame = run_gradcheck(config, seed=0, points=2, coords_per_entry=2)
        assert (frame['points'] == 2).all()
        assert list(frame.columns) == GRADCHECK_COLUMNS
        assert list(frame['component']) == list(COMPONENTS)
        assert (frame['max_error'] < 1e-4).all()

    def test_points_differ(self, config):
        one = run_gradcheck(config, seed=0, points=1, coords_per_entry=1)
        two = run_gradcheck(config, seed=0, points=2, coords_per_entry=1)
        assert (two['coordinates'] == 2 * one['coordinates']).all()
        assert (two['max_error'] >= one['max_error']).all()
