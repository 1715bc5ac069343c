"""
Configuration settings for the consciousness-prior lab.
"""
import os
from dataclasses import dataclass, field, fields
from typing import Tuple

# Project paths
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_RUNS_DIR = os.path.join(PROJECT_ROOT, 'runs')

# Environment variables read by the CLI (a .env file is honoured)
RUNS_DIR_ENV = 'CPLAB_RUNS_DIR'
LOG_LEVEL_ENV = 'CPLAB_LOG_LEVEL'

VERSION = '0.3.0'

# Nudge alphabet of the blocks world; probabilities are configured per symbol
NUDGES = (-1, 0, 1)

# Grid channels before the distractor colours
EMPTY, BLOCK, LEAN_LEFT, LEAN_RIGHT = 0, 1, 2, 3
BASE_CHANNELS = 4

# Parameter-store entries under this prefix are running statistics, not trained weights
STATS_PREFIX = 'stats.'


@dataclass(frozen=True)
class EnvConfig:
    """Blocks-fall world settings."""
    grid_size: int = 12
    pile_count: int = 3
    max_height: int = 4
    offset_bound: int = 3
    fall_threshold: int = 5
    nudge_probs: Tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3)
    distractor_count: int = 4
    distractor_colors: int = 3
    scatter_duration: int = 3
    lean_threshold: int = 2
    respawn_delay: int = 10

    @property
    def num_channels(self):
        return BASE_CHANNELS + self.distractor_colors

    @property
    def obs_dim(self):
        return self.grid_size * self.grid_size * self.num_channels


@dataclass(frozen=True)
class NetConfig:
    """Sizes of the representation RNN, consciousness mechanism, predictor and verifier."""
    slot_count: int = 16
    slot_width: int = 8
    key_dim: int = 16
    conditioning_slots: int = 3
    value_bins: int = 16
    encoder_hidden: int = 64
    score_hidden: int = 32
    predictor_hidden: int = 32
    verifier_hidden: int = 32
    temperature: float = 1.0
    temperature_decay: float = 0.999
    temperature_floor: float = 0.1
    readout_momentum: float = 0.99

    @property
    def state_dim(self):
        return self.slot_count * self.slot_width

    @property
    def selected_slots(self):
        return self.conditioning_slots + 1


@dataclass(frozen=True)
class TrainConfig:
    """Loss weights, optimiser and loop settings."""
    horizon: int = 5
    window: int = 12
    batch_size: int = 32
    negatives: int = 31
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    entropy_weight: float = 0.01
    diversity_weight: float = 0.1
    prediction_weight: float = 1.0
    nce_weight: float = 1.0
    variance_weight: float = 0.01
    variance_floor: float = 0.01
    reconstruction_weight: float = 0.0
    total_steps: int = 20000
    seed: int = 0
    temporal_negatives: bool = False
    buffer_capacity: int = 256
    episode_length: int = 64
    refresh_every: int = 10
    checkpoint_every: int = 1000
    log_every: int = 100
    planted_slot: int = -1


@dataclass(frozen=True)
class HarnessConfig:
    """Evaluation, probe and baseline settings."""
    eval_episodes: int = 40
    eval_temperature: float = 0.0
    probe_steps: int = 300
    probe_lr: float = 0.05
    probe_holdout: float = 0.3
    baseline_latent: int = 32
    baseline_hidden: int = 64
    baseline_steps: int = 2000
    baseline_batch: int = 16
    baseline_window: int = 8
    baseline_lr: float = 1e-3
    baseline_rollouts: int = 32
    mi_bins: int = 16
    oracle_states: int = 20
    eval_seeds: Tuple[int, ...] = ()
    gradcheck_points: int = 20
    min_probe_samples: int = 500
    min_statements: int = 200
    min_mi_samples: int = 2000


@dataclass(frozen=True)
class LabConfig:
    """All settings of one run, grouped by module."""
    env: EnvConfig = field(default_factory=EnvConfig)
    net: NetConfig = field(default_factory=NetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)


# Section name -> dataclass, in the order config snapshots are written
CONFIG_SECTIONS = {
    'env': EnvConfig,
    'net': NetConfig,
    'train': TrainConfig,
    'harness': HarnessConfig,
}


def config_keys():
    """
    Map every flat config key to the section that owns it.

    Returns:
        dict: key -> section name.
    """
    owners = {}
    for section, cls in CONFIG_SECTIONS.items():
        for f in fields(cls):
            owners[f.name] = section
    return owners
