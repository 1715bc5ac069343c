"""
Utility functions for validating configs and numeric data.
"""
import numpy as np


def validate_probabilities(probs, tolerance=1e-12):
    """
    Validate that values form a probability vector.

    Args:
        probs (array-like): Candidate probabilities.
        tolerance (float): Allowed deviation of the sum from 1.

    Returns:
        bool: True if all entries are non-negative and sum to 1 within tolerance.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size == 0 or np.any(probs < 0):
        return False
    return bool(abs(probs.sum() - 1.0) <= tolerance)


def validate_finite(*arrays):
    """
    Validate that every array is free of NaN and infinities.

    Returns:
        bool: True if all values are finite.
    """
    return all(bool(np.all(np.isfinite(np.asarray(a)))) for a in arrays)


def validate_env_config(config):
    """
    Validate the invariants of an EnvConfig.

    Returns:
        bool: True if the world can be built from this config.
    """
    g, p, h = config.grid_size, config.pile_count, config.max_height
    if p < 1 or g < 2 * p + 2:
        return False
    if config.fall_threshold < 1 or config.offset_bound < 1 or h < 1 or h > g:
        return False
    if len(config.nudge_probs) != 3 or not validate_probabilities(config.nudge_probs):
        return False
    if config.scatter_duration < 1 or config.lean_threshold < 1:
        return False
    if config.distractor_colors < 1 or config.distractor_count < 0 or config.respawn_delay < 0:
        return False
    # Free cells must hold every scattered block and every distractor at once
    free = g * g - p * h
    return free >= p * h + config.distractor_count


def validate_net_config(config):
    """
    Validate the invariants of a NetConfig.

    Returns:
        bool: True if valid, False otherwise.
    """
    sizes = (config.slot_count, config.slot_width, config.key_dim, config.encoder_hidden,
             config.score_hidden, config.predictor_hidden, config.verifier_hidden)
    if any(s < 1 for s in sizes) or config.conditioning_slots < 1:
        return False
    if config.selected_slots > config.slot_count or config.value_bins < 2:
        return False
    if config.temperature < 0 or config.temperature_floor < 0:
        return False
    if not 0 < config.temperature_decay <= 1:
        return False
    return 0 <= config.readout_momentum < 1


def validate_train_config(config):
    """
    Validate the invariants of a TrainConfig.

    Returns:
        bool: True if valid, False otherwise.
    """
    weights = (config.entropy_weight, config.diversity_weight, config.prediction_weight,
               config.nce_weight, config.variance_weight, config.reconstruction_weight)
    if any(w < 0 for w in weights):
        return False
    if config.horizon < 1 or config.window <= config.horizon:
        return False
    if config.batch_size < 2 or not 1 <= config.negatives <= config.batch_size - 1:
        return False
    if config.learning_rate <= 0 or config.variance_floor < 0:
        return False
    if config.episode_length < config.window or config.buffer_capacity < 1:
        return False
    counters = (config.total_steps, config.refresh_every, config.checkpoint_every, config.log_every)
    return all(c >= 1 for c in counters)


def validate_harness_config(config):
    """
    Validate the invariants of a HarnessConfig.

    Returns:
        bool: True if valid, False otherwise.
    """
    if not 0 < config.probe_holdout < 1 or config.probe_steps < 1 or config.probe_lr <= 0:
        return False
    if config.baseline_rollouts < 1 or config.baseline_steps < 1 or config.baseline_window < 2:
        return False
    if config.mi_bins < 2 or config.eval_episodes < 1 or config.eval_temperature < 0:
        return False
    return config.oracle_states >= 1 and config.gradcheck_points >= 1


def config_problems(config):
    """
    List the sections of a LabConfig that fail validation.

    Args:
        config (LabConfig): The config to check.

    Returns:
        list: Human-readable problems; empty when the config is valid.
    """
    problems = []
    checks = (
        ('env', validate_env_config, config.env),
        ('net', validate_net_config, config.net),
        ('train', validate_train_config, config.train),
        ('harness', validate_harness_config, config.harness),
    )
    for name, check, section in checks:
        if not check(section):
            problems.append(f"invalid [{name}] settings: {section}")
    if config.train.planted_slot >= config.net.slot_count:
        problems.append(
            f"planted_slot {config.train.planted_slot} is not below slot_count {config.net.slot_count}")
    return problems
