"""
Episodes of the blocks world: observations with their quarantined ground truth.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.env.blocks import EventRecord, WorldState, render, reset, step
from src.utils.data_loader import write_jsonl


@dataclass
class Trajectory:
    """
    One sampled episode.

    ``observations[t]`` is the channel grid rendered from ``states[t]``. ``events`` lists every
    fall with the step index of the state in which the pile is first seen scattering. The
    states and events are ground truth for evaluation and never reach a learner.
    """
    observations: np.ndarray
    states: Tuple[WorldState, ...]
    events: List[EventRecord]
    num_channels: int

    def __len__(self):
        return len(self.states)

    def one_hot(self):
        """Observations as (T, G, G, C) one-hot tensors."""
        return one_hot(self.observations, self.num_channels)

    def flat_observations(self):
        """Observations as (T, G*G*C) input vectors."""
        return self.one_hot().reshape(len(self), -1)

    def events_at(self, t):
        return [e for e in self.events if e.step == t]


def one_hot(channels, num_channels):
    """Expand integer channel grids of any leading shape to one-hot float64."""
    return np.eye(num_channels, dtype=np.float64)[np.asarray(channels, dtype=np.int64)]


def sample_trajectory(config, rng, length):
    """
    Sample an episode of ``length`` observations from a fresh reset.

    Args:
        config (EnvConfig): World settings.
        rng (SeededRng): Randomness source.
        length (int): Number of observations T >= 1.

    Returns:
        Trajectory: Aligned observations, states and fall events.
    """
    if length < 1:
        raise ValueError(f"trajectory length must be >= 1, got {length}")
    state = reset(config, rng)
    states = [state]
    events = []
    for _ in range(length - 1):
        state, fell = step(state, rng)
        states.append(state)
        events.extend(fell)
    observations = np.stack([render(s).channels for s in states]).astype(np.uint8)
    return Trajectory(observations=observations, states=tuple(states), events=events,
                      num_channels=config.num_channels)


def fall_labels(trajectory, pile, horizon):
    """
    Whether ``pile`` falls within ``horizon`` steps after each time index.

    Returns:
        tuple: (labels, valid) boolean arrays of length T. ``valid[t]`` is False when the pile
        is not standing at t or when t + horizon runs past the episode.
    """
    total = len(trajectory)
    fall_steps = sorted(e.step for e in trajectory.events if e.pile == pile)
    labels = np.zeros(total, dtype=bool)
    valid = np.zeros(total, dtype=bool)
    for t, state in enumerate(trajectory.states):
        if t + horizon >= total or not state.piles[pile].standing:
            continue
        valid[t] = True
        labels[t] = any(t < s <= t + horizon for s in fall_steps)
    return labels, valid


def dump_trajectory(trajectory, path):
    """
    Write one JSON object per step: {"t", "obs", "events", "truth"}.

    Returns:
        str: The path written.
    """
    flat = trajectory.flat_observations()
    records = (
        {
            't': t,
            'obs': flat[t].tolist(),
            'events': [{'pile': e.pile, 'kind': e.kind} for e in trajectory.events_at(t)],
            'truth': state.to_dict(),
        }
        for t, state in enumerate(trajectory.states)
    )
    return write_jsonl(records, path)
