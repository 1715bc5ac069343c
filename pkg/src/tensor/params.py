"""
Named parameter storage with per-entry optimiser state.
"""
from dataclasses import dataclass

import numpy as np

from src.config import STATS_PREFIX
from src.errors import ShapeError
from src.tensor.autograd import parameter


@dataclass
class ParameterEntry:
    """A parameter value plus its Adam moments and step count."""
    value: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0


class ParameterStore:
    """
    Ordered map from paths such as ``"f.gru.w_z"`` to parameters.

    Names are unique and shapes are fixed at creation. Entries under ``stats.`` hold running
    statistics that the optimiser never touches.
    """

    def __init__(self):
        self._entries = {}

    def create(self, name, value):
        """
        Add a new entry with fresh optimiser state.

        Raises:
            KeyError: If the name already exists.
        """
        if name in self._entries:
            raise KeyError(f"Parameter already exists: {name}")
        value = np.array(value, dtype=np.float64)
        self._entries[name] = ParameterEntry(value, np.zeros_like(value), np.zeros_like(value))
        return self._entries[name]

    def restore(self, name, value, m, v, step):
        """Add an entry with explicit optimiser state (used by checkpoint loading)."""
        if name in self._entries:
            raise KeyError(f"Parameter already exists: {name}")
        if value.shape != m.shape or value.shape != v.shape:
            raise ShapeError(f"{name}: moment shapes {m.shape}/{v.shape} differ from value {value.shape}")
        self._entries[name] = ParameterEntry(value, m, v, int(step))

    def node(self, name):
        """Return a graph leaf for the parameter; gradients are reported under ``name``."""
        return parameter(self._entries[name].value, name)

    def value(self, name):
        return self._entries[name].value

    def set_value(self, name, value):
        value = np.asarray(value, dtype=np.float64)
        entry = self._entries[name]
        if value.shape != entry.value.shape:
            raise ShapeError(f"{name}: shape {value.shape} differs from fixed shape {entry.value.shape}")
        entry.value = value.copy()

    def entry(self, name):
        return self._entries[name]

    def names(self):
        return list(self._entries)

    def trainable_names(self):
        return [name for name in self._entries if not name.startswith(STATS_PREFIX)]

    def items(self):
        return self._entries.items()

    def copy(self):
        clone = ParameterStore()
        for name, e in self._entries.items():
            clone.restore(name, e.value.copy(), e.m.copy(), e.v.copy(), e.step)
        return clone

    def __contains__(self, name):
        return name in self._entries

    def __len__(self):
        return len(self._entries)


def glorot_uniform(rng, fan_in, fan_out):
    """Weights uniform in +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform((fan_in, fan_out), low=-limit, high=limit)
