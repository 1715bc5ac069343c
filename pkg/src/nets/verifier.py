"""
Verifier: scores the consistency of a past conscious state with a later representation state.
"""
import numpy as np

from src.nets.base import BaseNetwork
from src.nets.consciousness import KEY_TABLE
from src.nets.layers import broadcast_to, init_mlp, mlp
from src.tensor import ops


class Verifier(BaseNetwork):
    """
    V(h_future, c_past) in R.

    A's key attends softly over the key table; the attention weights read a slot value out of
    ``h_future``. That retrieved value, the predicted distribution, the pooled B content and
    A's key feed an MLP giving one score. Higher means more consistent.
    """

    prefix = 'v'

    def init_params(self, store, rng):
        n = self.net
        inputs = n.slot_width + n.value_bins + (n.key_dim + n.slot_width) + n.key_dim
        init_mlp(store, 'v.mlp', rng, [inputs, n.verifier_hidden, 1])

    def key_attention(self, store, c_past):
        """(B, M) softmax of A's key against every row of the key table."""
        logits = ops.matmul(c_past.a_key, ops.transpose(store.node(KEY_TABLE)))
        return ops.softmax(ops.scale(logits, 1.0 / np.sqrt(self.net.key_dim)), axis=1)

    def verify(self, store, h_future, c_past, prediction):
        """
        Score each batch row against its own future.

        Args:
            store (ParameterStore): Parameters.
            h_future (Node): (B, M, w) later representation state.
            c_past (ConsciousState): Earlier conscious state.
            prediction (Prediction): Prediction made from ``c_past``.

        Returns:
            Node: (B,) scores.
        """
        batch, slots, width = h_future.value.shape
        attention = ops.reshape(self.key_attention(store, c_past), (batch, slots, 1))
        retrieved = ops.sum(ops.multiply(attention, h_future), axis=1)
        features = ops.concat([retrieved, prediction.probs, c_past.b_pooled(), c_past.a_key], axis=1)
        return ops.reshape(mlp(store, 'v.mlp', features, depth=2), (batch,))

    def verify_matrix(self, store, h_futures, c_past, prediction):
        """
        Score every conscious state against every future of the batch.

        Returns:
            Node: (B, B) scores; entry [i, j] pairs c_past row i with h_futures row j, so the
            diagonal holds the true pairs.
        """
        batch, slots, width = h_futures.value.shape
        attention = ops.reshape(self.key_attention(store, c_past), (batch, 1, slots, 1))
        futures = ops.reshape(h_futures, (1, batch, slots, width))
        retrieved = ops.sum(ops.multiply(attention, futures), axis=2)

        context = ops.concat([prediction.probs, c_past.b_pooled(), c_past.a_key], axis=1)
        size = context.value.shape[1]
        context = broadcast_to(ops.reshape(context, (batch, 1, size)), (batch, batch, size))
        features = ops.concat([retrieved, context], axis=2)
        flat = ops.reshape(features, (batch * batch, features.value.shape[2]))
        return ops.reshape(mlp(store, 'v.mlp', flat, depth=2), (batch, batch))
