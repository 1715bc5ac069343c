"""
Ring buffer of sampled episodes for window sampling.
"""
import numpy as np


class TrajectoryBuffer:
    """
    Fixed-capacity ring of episodes stored as uint8 channel grids.

    Only observations enter the buffer; ground-truth states stay with the Trajectory objects.
    Every sampled window lies inside a single episode.
    """

    def __init__(self, capacity, episode_length, grid_size):
        self.capacity = capacity
        self.episode_length = episode_length
        self._episodes = np.zeros((capacity, episode_length, grid_size, grid_size), dtype=np.uint8)
        self._size = 0
        self._cursor = 0

    def __len__(self):
        return self._size

    @property
    def cursor(self):
        """Slot the next episode overwrites."""
        return self._cursor

    def add(self, observations):
        """
        Store one episode's channel grids, evicting the oldest once full.

        Raises:
            ValueError: If the episode length differs from the buffer's.
        """
        observations = np.asarray(observations)
        if observations.shape[0] != self.episode_length:
            raise ValueError(
                f"episode has {observations.shape[0]} steps, buffer holds {self.episode_length}")
        self._episodes[self._cursor] = observations
        self._cursor = (self._cursor + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample_windows(self, rng, batch, window):
        """
        Draw ``batch`` windows of ``window`` consecutive steps.

        Returns:
            tuple: (windows uint8 (batch, window, G, G), episode slots (batch,), starts (batch,))
        """
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        if window > self.episode_length:
            raise ValueError(f"window {window} exceeds episode length {self.episode_length}")
        episodes = rng.integers(self._size, size=batch)
        starts = rng.integers(self.episode_length - window + 1, size=batch)
        offsets = starts[:, None] + np.arange(window)[None, :]
        windows = self._episodes[episodes[:, None], offsets]
        return windows, episodes, starts
