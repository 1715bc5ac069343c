"""
Exact fall probabilities by enumerating nudge sequences.
"""
from functools import lru_cache

import numpy as np
import pandas as pd

from src.config import NUDGES
from src.env.blocks import falls, reset, step
from src.errors import OracleBudgetError
from src.mappings.report_format import ORACLE_COLUMNS

# Upper bound on the number of (pile choice x nudge) paths an oracle call may cover
MAX_ORACLE_PATHS = 10 ** 7


def path_count(config, horizon):
    return (config.pile_count * len(NUDGES)) ** horizon


def oracle_fall_prob(state, pile, horizon):
    """
    Probability that a pile falls at or before ``horizon`` steps from ``state``.

    Every sequence of (pile choice, nudge) pairs of length ``horizon`` is weighted by its
    probability; sequences in which the pile falls are summed. Choices of other piles
    leave the target's offset unchanged, so identical sub-problems are shared. Scatter and
    distractor randomness cannot affect the event and are not enumerated.

    Args:
        state (WorldState): Starting state.
        pile (int): Target pile index.
        horizon (int): Number of steps K >= 0.

    Returns:
        float: Probability in [0, 1].

    Raises:
        OracleBudgetError: If (pile_count * 3) ** horizon exceeds 10**7.
    """
    config = state.config
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if path_count(config, horizon) > MAX_ORACLE_PATHS:
        raise OracleBudgetError(
            f"{path_count(config, horizon)} paths for K={horizon}, P={config.pile_count} "
            f"exceed the {MAX_ORACLE_PATHS} guard; lower K")
    target = state.piles[pile]
    if not target.standing:
        return 1.0
    return _standing_fall_prob(config, target.height, target.offset, horizon)


def _standing_fall_prob(config, height, offset, horizon):
    choose = 1.0 / config.pile_count
    nudge_probs = tuple(float(p) for p in config.nudge_probs)

    @lru_cache(maxsize=None)
    def prob(current, remaining):
        if remaining == 0:
            return 0.0
        # Another pile is chosen: the target is untouched this step
        total = (1.0 - choose) * prob(current, remaining - 1)
        for nudge, p in zip(NUDGES, nudge_probs):
            moved = int(np.clip(current + nudge, -config.offset_bound, config.offset_bound))
            if falls(height, moved, config.fall_threshold):
                total += choose * p
            else:
                total += choose * p * prob(moved, remaining - 1)
        return total

    return prob(offset, horizon)


def monte_carlo_fall_probs(state, horizon, samples, rng):
    """
    Estimate every pile's fall probability by rolling the world forward with ``step``.

    Args:
        state (WorldState): Starting state.
        horizon (int): Number of steps.
        samples (int): Number of simulated rollouts.
        rng (SeededRng): Randomness source.

    Returns:
        numpy.ndarray: (P,) fraction of rollouts in which each pile fell; 1.0 for piles
            that are not standing at the start.
    """
    fell = np.array([not pile.standing for pile in state.piles])
    counts = np.zeros(len(state.piles))
    for _ in range(samples):
        current, seen = state, fell.copy()
        for _ in range(horizon):
            current, events = step(current, rng)
            for event in events:
                seen[event.pile] = True
        counts += seen
    return counts / samples


def sample_states(config, rng, count, max_steps=20):
    """Reset worlds advanced by a random number of steps, so some piles may have fallen."""
    states = []
    for _ in range(count):
        state = reset(config, rng)
        for _ in range(int(rng.integers(max_steps + 1))):
            state, _ = step(state, rng)
        states.append(state)
    return states


def oracle_table(config, rng, count, horizon):
    """
    Fall probabilities of every pile of ``count`` sampled states.

    Returns:
        pandas.DataFrame: columns state_id, pile, K, probability.
    """
    rows = [
        {'state_id': state_id, 'pile': pile, 'K': horizon, 'probability': oracle_fall_prob(state, pile, horizon)}
        for state_id, state in enumerate(sample_states(config, rng, count))
        for pile in range(config.pile_count)
    ]
    return pd.DataFrame(rows, columns=ORACLE_COLUMNS)
