"""
Consciousness mechanism: a noisy sparse attention bottleneck over named slots.

Each slot is scored by an MLP over its value, its key and a pooled summary of the previous
conscious state. Gumbel noise scaled by the temperature perturbs the scores, and the top
k_B + 1 slots are selected. A role head over the selected slots picks the predicted slot A;
the others form the conditioning set B. Selection and role use hard choices in the forward
pass and softmax gradients in the backward pass.
"""
from dataclasses import dataclass

import numpy as np

from src.nets.base import BaseNetwork
from src.nets.layers import broadcast_to, init_mlp, mlp
from src.tensor import ops
from src.tensor.autograd import Node, constant
from src.tensor.sampling import gumbel_sample, top_k_rows

KEY_TABLE = 'keys.table'

# Score offset that removes unselected slots from the smooth selection softmax
SELECTION_MASK = 1e30


@dataclass
class ConsciousState:
    """
    A batch of conscious states c_t.

    Attributes:
        a_key (Node): (B, d_k) key of the predicted slot A.
        a_value (Node): (B, w) value of A.
        b_keys (Node): (B, k_B, d_k) keys of the conditioning slots.
        b_values (Node): (B, k_B, w) values of the conditioning slots.
        attention (Node): (B, M) softmax attention probabilities over all slots.
        selection (Node): (B, M) selection weights (hard 0/1 forward values).
        role_probs (Node): (B, k_B + 1) role-head probabilities over the selected slots.
        a_index (numpy.ndarray): (B,) slot id of A.
        b_indices (numpy.ndarray): (B, k_B) slot ids of B, in descending score order.
        noise (numpy.ndarray): (B, M) Gumbel draws used for the selection.
        temperature (float): Noise scale of the draw.
    """
    a_key: Node
    a_value: Node
    b_keys: Node
    b_values: Node
    attention: Node
    selection: Node
    role_probs: Node
    a_index: np.ndarray
    b_indices: np.ndarray
    noise: np.ndarray
    temperature: float

    @property
    def batch(self):
        return self.a_index.shape[0]

    def selected_slots(self):
        """(B, k_B + 1) slot ids, A first."""
        return np.concatenate([self.a_index[:, None], self.b_indices], axis=1)

    def content(self):
        """(B, (k_B + 1) * (d_k + w)) flat content of c_t."""
        b = self.batch
        return ops.concat([
            self.a_key,
            self.a_value,
            ops.reshape(self.b_keys, (b, -1)),
            ops.reshape(self.b_values, (b, -1)),
        ], axis=1)

    def b_pooled(self):
        """(B, d_k + w) mean over the conditioning slots of key + value."""
        return ops.mean(ops.concat([self.b_keys, self.b_values], axis=2), axis=1)

    def summary(self):
        """(B, d_k + w) mean over all selected slots of key + value."""
        k_b = self.b_indices.shape[1]
        a = ops.concat([self.a_key, self.a_value], axis=1)
        b = ops.sum(ops.concat([self.b_keys, self.b_values], axis=2), axis=1)
        return ops.scale(ops.add(a, b), 1.0 / (k_b + 1))


class ConsciousnessMechanism(BaseNetwork):
    """c_t = C(h_t, c_{t-1}, z_t)."""

    prefix = 'c'

    def init_params(self, store, rng):
        n = self.net
        # Keys stay away from all-zero rows: a row norm of exactly zero has probability zero
        store.create(KEY_TABLE, rng.uniform((n.slot_count, n.key_dim), low=-1.0, high=1.0))
        slot_features = n.slot_width + n.key_dim + (n.key_dim + n.slot_width)
        init_mlp(store, 'c.score', rng, [slot_features, n.score_hidden, 1])
        init_mlp(store, 'c.role', rng, [n.key_dim + n.slot_width, n.score_hidden, 1])

    def _summary(self, c_prev, batch):
        if c_prev is None:
            return constant(np.zeros((batch, self.net.key_dim + self.net.slot_width)))
        return c_prev.summary()

    def slot_scores(self, store, h, c_prev):
        """(B, M) unperturbed slot scores."""
        batch, slots, width = h.value.shape
        d_k = self.net.key_dim
        keys = broadcast_to(store.node(KEY_TABLE), (batch, slots, d_k))
        summary = self._summary(c_prev, batch)
        context = broadcast_to(ops.reshape(summary, (batch, 1, summary.value.shape[1])),
                               (batch, slots, summary.value.shape[1]))
        features = ops.concat([h, keys, context], axis=2)
        flat = ops.reshape(features, (batch * slots, features.value.shape[2]))
        return ops.reshape(mlp(store, 'c.score', flat, depth=2), (batch, slots))

    def conscious_step(self, store, h, c_prev, rng, temperature, selection=None, a_positions=None,
                       straight_through=True):
        """
        Select k_B + 1 slots of ``h`` and assign the A/B roles.

        Args:
            store (ParameterStore): Parameters.
            h (Node): (B, M, w) representation state.
            c_prev (ConsciousState or None): Previous conscious state (None at the start).
            rng (SeededRng): Noise source; one (B, M) Gumbel draw per call.
            temperature (float): Noise scale; 0 makes the step deterministic.
            selection (numpy.ndarray, optional): (B, k_B + 1) slot ids to use instead of the
                noisy top-k.
            a_positions (numpy.ndarray, optional): (B,) position of A within ``selection``.
            straight_through (bool): When False, selection weights are the attention
                probabilities renormalised over the fixed selection and roles carry no
                gradient. That path is smooth, so finite differences agree with backward().

        Returns:
            ConsciousState: The new conscious state.
        """
        batch, slots, width = h.value.shape
        d_k, k = self.net.key_dim, self.net.selected_slots
        rows = np.arange(batch)

        scores = self.slot_scores(store, h, c_prev)
        noise = gumbel_sample(rng, (batch, slots))
        if selection is None:
            selection = top_k_rows(scores.value + temperature * noise, k)
        selection = np.asarray(selection, dtype=np.int64)

        attention = ops.softmax(scores, axis=1)
        hard = np.zeros((batch, slots))
        hard[rows[:, None], selection] = 1.0
        if straight_through:
            weights = ops.straight_through(hard, attention)
        else:
            # Softmax restricted to the selected slots, scaled so the weights average to one
            excluded = np.where(hard > 0, 0.0, -SELECTION_MASK)
            weights = ops.scale(ops.softmax(ops.add(scores, excluded), axis=1), k)

        flat_ids = (rows[:, None] * slots + selection).reshape(-1)
        slot_weight = ops.gather_rows(ops.reshape(weights, (batch * slots, 1)), flat_ids)
        values = ops.multiply(ops.gather_rows(ops.reshape(h, (batch * slots, width)), flat_ids), slot_weight)
        keys = ops.multiply(ops.gather_rows(store.node(KEY_TABLE), selection.reshape(-1)), slot_weight)

        role_logits = ops.reshape(mlp(store, 'c.role', ops.concat([keys, values], axis=1), depth=2), (batch, k))
        role_probs = ops.softmax(role_logits, axis=1)
        if a_positions is None:
            a_positions = np.argmax(role_logits.value, axis=1)
        a_positions = np.asarray(a_positions, dtype=np.int64)
        role_hard = np.zeros((batch, k))
        role_hard[rows, a_positions] = 1.0
        role = ops.straight_through(role_hard, role_probs) if straight_through else constant(role_hard)

        keys = ops.reshape(keys, (batch, k, d_k))
        values = ops.reshape(values, (batch, k, width))
        role_a = ops.reshape(role, (batch, k, 1))
        a_key = ops.sum(ops.multiply(keys, role_a), axis=1)
        a_value = ops.sum(ops.multiply(values, role_a), axis=1)

        # B keeps the selected positions other than A, in score order
        b_positions = np.array([[j for j in range(k) if j != a_positions[i]] for i in rows], dtype=np.int64)
        b_flat = (rows[:, None] * k + b_positions).reshape(-1)
        role_b = ops.reshape(ops.subtract(1.0, role), (batch * k, 1))

        def pick_b(node, dim):
            weighted = ops.multiply(ops.reshape(node, (batch * k, dim)), role_b)
            return ops.reshape(ops.gather_rows(weighted, b_flat), (batch, k - 1, dim))

        return ConsciousState(
            a_key=a_key,
            a_value=a_value,
            b_keys=pick_b(keys, d_k),
            b_values=pick_b(values, width),
            attention=attention,
            selection=weights,
            role_probs=role_probs,
            a_index=selection[rows, a_positions],
            b_indices=np.take_along_axis(selection, b_positions, axis=1),
            noise=noise,
            temperature=float(temperature),
        )
