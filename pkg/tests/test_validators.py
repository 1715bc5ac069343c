"""
Tests for the validators module.
"""
from dataclasses import replace

import numpy as np

from src.config import EnvConfig, HarnessConfig, LabConfig, NetConfig, TrainConfig
from src.utils.validators import (
    config_problems,
    validate_env_config,
    validate_finite,
    validate_harness_config,
    validate_net_config,
    validate_probabilities,
    validate_train_config,
)


class TestNumericValidators:
    """
    Test cases for the array validators.
    """

    def test_validate_probabilities(self):
        """Test probability vectors."""
        assert validate_probabilities([0.2, 0.3, 0.5]) is True
        assert validate_probabilities([0.5, 0.6]) is False
        assert validate_probabilities([1.5, -0.5]) is False
        assert validate_probabilities([]) is False

    def test_validate_probabilities_tolerance(self):
        assert validate_probabilities([0.5, 0.5 + 1e-9], tolerance=1e-6) is True
        assert validate_probabilities([0.5, 0.5 + 1e-9]) is False

    def test_validate_finite(self):
        """Test NaN and infinity detection across several arrays."""
        assert validate_finite(np.zeros(3), [1.0, 2.0]) is True
        assert validate_finite(np.zeros(3), [1.0, np.nan]) is False
        assert validate_finite(np.array([np.inf])) is False


class TestConfigValidators:
    """
    Test cases for the per-section config validators.
    """

    def test_defaults_are_valid(self):
        config = LabConfig()
        assert validate_env_config(config.env)
        assert validate_net_config(config.net)
        assert validate_train_config(config.train)
        assert validate_harness_config(config.harness)
        assert config_problems(config) == []

    def test_env_limits(self):
        assert not validate_env_config(EnvConfig(grid_size=7, pile_count=3))
        assert not validate_env_config(EnvConfig(nudge_probs=(0.5, 0.5)))
        assert not validate_env_config(EnvConfig(nudge_probs=(0.5, 0.5, 0.5)))
        assert not validate_env_config(EnvConfig(fall_threshold=0))
        # No room for scattered blocks and distractors
        assert not validate_env_config(EnvConfig(grid_size=8, pile_count=3, max_height=8, distractor_count=20))

    def test_net_limits(self):
        assert not validate_net_config(NetConfig(slot_count=3, conditioning_slots=3))
        assert not validate_net_config(NetConfig(value_bins=1))
        assert not validate_net_config(NetConfig(temperature_decay=0.0))
        assert not validate_net_config(NetConfig(readout_momentum=1.0))

    def test_train_limits(self):
        assert not validate_train_config(TrainConfig(horizon=5, window=5))
        assert not validate_train_config(TrainConfig(batch_size=8, negatives=8))
        assert not validate_train_config(TrainConfig(episode_length=10, window=12))
        assert not validate_train_config(TrainConfig(entropy_weight=-0.1))
        assert validate_train_config(TrainConfig(batch_size=8, negatives=7))

    def test_harness_limits(self):
        assert not validate_harness_config(HarnessConfig(probe_holdout=1.0))
        assert not validate_harness_config(HarnessConfig(mi_bins=1))
        assert not validate_harness_config(HarnessConfig(baseline_window=1))


class TestConfigProblems:
    """
    Test cases for config_problems.
    """

    def test_reports_failing_sections(self):
        config = LabConfig(net=NetConfig(value_bins=1), train=TrainConfig(horizon=20))
        problems = config_problems(config)
        assert len(problems) == 2
        assert problems[0].startswith('invalid [net]')
        assert problems[1].startswith('invalid [train]')

    def test_planted_slot_must_exist(self):
        config = LabConfig()
        planted = replace(config, train=replace(config.train, planted_slot=config.net.slot_count))
        assert any('planted_slot' in p for p in config_problems(planted))
        inside = replace(config, train=replace(config.train, planted_slot=0))
        assert config_problems(inside) == []
