"""
The full model: representation RNN, consciousness mechanism, predictor and verifier sharing
one ParameterStore, plus the binning of slot readouts into prediction targets.
"""
import logging

import numpy as np

from src.config import STATS_PREFIX
from src.nets.consciousness import ConsciousnessMechanism
from src.nets.predictor import Predictor
from src.nets.representation import RepresentationRNN
from src.nets.verifier import Verifier
from src.tensor import ops
from src.tensor.params import ParameterStore

log = logging.getLogger(__name__)

READOUT_RANGE = STATS_PREFIX + 'readout_range'

# Value held by every coordinate of a planted slot
PLANTED_VALUE = 0.5


class ValueBinner:
    """
    Uniform bins over the running range of slot readouts.

    A slot's readout is the first coordinate of its value. The range is an exponential moving
    average of the batch min and max, stored as a non-trainable store entry so checkpoints
    carry it.
    """

    def __init__(self, net_config):
        self.bins = net_config.value_bins
        self.momentum = net_config.readout_momentum

    def init_params(self, store):
        # GRU states lie in (-1, 1)
        store.create(READOUT_RANGE, np.array([-1.0, 1.0]))

    def assign(self, store, readouts):
        """Bin index of each readout, clipped to [0, bins - 1]."""
        low, high = store.value(READOUT_RANGE)
        width = max(high - low, 1e-12)
        index = np.floor((np.asarray(readouts) - low) / width * self.bins).astype(np.int64)
        return np.clip(index, 0, self.bins - 1)

    def update(self, store, readouts):
        readouts = np.asarray(readouts, dtype=np.float64)
        low, high = store.value(READOUT_RANGE)
        m = self.momentum
        store.set_value(READOUT_RANGE, np.array([
            m * low + (1.0 - m) * readouts.min(),
            m * high + (1.0 - m) * readouts.max(),
        ]))


def slot_readouts(h_value, slots=None):
    """
    First coordinate of slot values.

    Args:
        h_value (numpy.ndarray): (B, M, w) state values.
        slots (numpy.ndarray, optional): (B,) slot id per row.

    Returns:
        numpy.ndarray: (B, M) readouts, or (B,) when ``slots`` is given.
    """
    if slots is None:
        return h_value[:, :, 0]
    return h_value[np.arange(h_value.shape[0]), slots, 0]


class ConsciousnessModel:
    """Bundle of the four networks of one run."""

    def __init__(self, config):
        self.config = config
        self.representation = RepresentationRNN(config)
        self.consciousness = ConsciousnessMechanism(config)
        self.predictor = Predictor(config)
        self.verifier = Verifier(config)
        self.binner = ValueBinner(config.net)
        self.planted_slot = config.train.planted_slot

    @property
    def networks(self):
        return (self.representation, self.consciousness, self.predictor, self.verifier)

    def init_params(self, rng):
        """
        Create every parameter.

        Args:
            rng (SeededRng): Each network initialises from its own fork.

        Returns:
            ParameterStore: Fresh store.
        """
        store = ParameterStore()
        for network in self.networks:
            network.init_params(store, rng.fork(network.prefix))
        self.binner.init_params(store)
        log.debug("Initialised %d parameter entries", len(store))
        return store

    def plant(self, h):
        """Overwrite the planted slot (if any) with a constant."""
        if self.planted_slot < 0:
            return h
        keep = np.ones(h.value.shape)
        keep[:, self.planted_slot, :] = 0.0
        planted = (1.0 - keep) * PLANTED_VALUE
        return ops.add(ops.mask(h, keep), planted)

    def unroll(self, store, observations, steps=None):
        """
        Run the representation RNN over a batch of windows from the zero state.

        Args:
            store (ParameterStore): Parameters.
            observations (numpy.ndarray): (B, T, obs_dim) flattened one-hot observations.
            steps (int, optional): Stop after this many steps (default T).

        Returns:
            list: ``steps`` state nodes, each (B, M, w).
        """
        batch, length = observations.shape[:2]
        steps = length if steps is None else steps
        h = self.representation.initial_state(batch)
        states = []
        for t in range(steps):
            h = self.plant(self.representation.encode_step(store, observations[:, t], h))
            states.append(h)
        return states

    def think(self, store, h, c_prev, rng, temperature, **kwargs):
        """Conscious step followed by the prediction it carries."""
        c_t = self.consciousness.conscious_step(store, h, c_prev, rng, temperature, **kwargs)
        return c_t, self.predictor.predict(store, c_t)
