"""
Representation RNN: a gated recurrent update of the M x w slot state from each observation.
"""
import numpy as np

from src.errors import ShapeError
from src.nets.base import BaseNetwork
from src.nets.layers import dense, init_dense, init_mlp, mlp
from src.tensor import ops
from src.tensor.autograd import constant
from src.tensor.params import glorot_uniform

# Update-gate bias at initialisation; slots forget slowly early in training
UPDATE_GATE_BIAS = 1.0


class RepresentationRNN(BaseNetwork):
    """
    h_t = F(s_t, h_{t-1}).

    The observation passes through a two-layer tanh encoder, then a GRU cell updates the
    flattened slot state: h' = z * h + (1 - z) * n.
    """

    prefix = 'f'

    def init_params(self, store, rng):
        obs_dim, hidden, state = self.env.obs_dim, self.net.encoder_hidden, self.net.state_dim
        init_mlp(store, 'f.enc', rng, [obs_dim, hidden, hidden])
        for gate in ('z', 'r', 'n'):
            store.create(f"f.gru.w_{gate}", glorot_uniform(rng, hidden, state))
            store.create(f"f.gru.u_{gate}", glorot_uniform(rng, state, state))
            bias = UPDATE_GATE_BIAS if gate == 'z' else 0.0
            store.create(f"f.gru.b_{gate}", np.full(state, bias))
        init_dense(store, 'f.dec', rng, state, obs_dim)

    def initial_state(self, batch):
        return constant(np.zeros((batch, self.net.slot_count, self.net.slot_width)))

    def validate_input(self, data):
        value = data.value if hasattr(data, 'value') else np.asarray(data)
        return value.ndim == 2 and value.shape[1] == self.env.obs_dim

    def encode_step(self, store, obs, h_prev):
        """
        One recurrent update.

        Args:
            store (ParameterStore): Parameters.
            obs (numpy.ndarray or Node): (B, obs_dim) flattened one-hot observations.
            h_prev (Node): (B, M, w) previous state.

        Returns:
            Node: (B, M, w) new state.

        Raises:
            ShapeError: If the observation width does not match the environment config.
        """
        if not self.validate_input(obs):
            shape = obs.value.shape if hasattr(obs, 'value') else np.shape(obs)
            raise ShapeError(f"encode_step: observation shape {shape} does not match obs_dim {self.env.obs_dim}")
        batch = h_prev.value.shape[0]
        e = ops.tanh(mlp(store, 'f.enc', obs, depth=2))
        h = ops.reshape(h_prev, (batch, self.net.state_dim))

        def gate(name, state_input):
            return ops.add(ops.add(ops.matmul(e, store.node(f"f.gru.w_{name}")),
                                   ops.matmul(state_input, store.node(f"f.gru.u_{name}"))),
                           store.node(f"f.gru.b_{name}"))

        z = ops.sigmoid(gate('z', h))
        r = ops.sigmoid(gate('r', h))
        n = ops.tanh(gate('n', ops.multiply(r, h)))
        h_new = ops.add(ops.multiply(z, h), ops.multiply(ops.subtract(1.0, z), n))
        return ops.reshape(h_new, (batch, self.net.slot_count, self.net.slot_width))

    def reconstruct(self, store, h):
        """Linear decoder from the flattened state back to the observation vector."""
        batch = h.value.shape[0]
        return dense(store, 'f.dec', ops.reshape(h, (batch, self.net.state_dim)))
