"""
Predictor: a categorical distribution over value bins of A's readout K steps ahead.
"""
from dataclasses import dataclass

from src.nets.base import BaseNetwork
from src.nets.layers import init_mlp, mlp
from src.tensor import ops
from src.tensor.autograd import Node


@dataclass
class Prediction:
    logits: Node
    probs: Node


class Predictor(BaseNetwork):
    """P(A | B): MLP over the pooled B content and A's key."""

    prefix = 'p'

    def init_params(self, store, rng):
        n = self.net
        init_mlp(store, 'p.mlp', rng, [2 * n.key_dim + n.slot_width, n.predictor_hidden, n.value_bins])

    def predict(self, store, c_t):
        """
        Args:
            store (ParameterStore): Parameters.
            c_t (ConsciousState): Conscious state batch.

        Returns:
            Prediction: (B, V_bins) logits and probabilities.
        """
        features = ops.concat([c_t.b_pooled(), c_t.a_key], axis=1)
        logits = mlp(store, 'p.mlp', features, depth=2)
        return Prediction(logits=logits, probs=ops.softmax(logits, axis=1))
