"""
Shared tiny configurations: the same code paths as a desk run at a fraction of the size.
"""
import pytest

from src.config import EnvConfig, HarnessConfig, LabConfig, NetConfig, TrainConfig

# Set to run the slow full-size statistical checks
FULL_CHECKS_ENV = 'CPLAB_FULL_CHECKS'


def tiny_config(**train_overrides):
    """A LabConfig small enough for unit tests; ``train_overrides`` replace TrainConfig fields."""
    env = EnvConfig(grid_size=8, pile_count=3, max_height=3, offset_bound=3, fall_threshold=3,
                    distractor_count=2, distractor_colors=2, scatter_duration=2, respawn_delay=3)
    net = NetConfig(slot_count=6, slot_width=4, key_dim=5, conditioning_slots=2, value_bins=8,
                    encoder_hidden=12, score_hidden=8, predictor_hidden=8, verifier_hidden=8)
    train = dict(horizon=2, window=6, batch_size=4, negatives=3, learning_rate=1e-2, total_steps=6,
                 buffer_capacity=6, episode_length=16, refresh_every=2, checkpoint_every=3, log_every=2)
    train.update(train_overrides)
    harness = HarnessConfig(eval_episodes=6, probe_steps=50, baseline_latent=6, baseline_hidden=10,
                            baseline_steps=4, baseline_batch=3, baseline_window=4, baseline_rollouts=4,
                            mi_bins=4, oracle_states=3, gradcheck_points=3, min_probe_samples=10,
                            min_statements=10, min_mi_samples=10)
    return LabConfig(env=env, net=net, train=TrainConfig(**train), harness=harness)


@pytest.fixture
def config():
    return tiny_config()


@pytest.fixture
def env_config(config):
    return config.env
