"""
Dense layers and small MLPs over store entries.
"""
import numpy as np

from src.tensor import ops
from src.tensor.params import glorot_uniform


def init_dense(store, name, rng, fan_in, fan_out, bias=0.0):
    """Create ``<name>.w`` (Glorot uniform) and ``<name>.b`` (constant, default zero)."""
    store.create(f"{name}.w", glorot_uniform(rng, fan_in, fan_out))
    store.create(f"{name}.b", np.full(fan_out, bias, dtype=np.float64))


def dense(store, name, x):
    """x @ w + b for a 2-D input."""
    return ops.add(ops.matmul(x, store.node(f"{name}.w")), store.node(f"{name}.b"))


def init_mlp(store, name, rng, sizes):
    """
    Create layers ``<name>.l1 .. <name>.l<n>`` for consecutive ``sizes``.

    Args:
        sizes (list): [input, hidden..., output]
    """
    for index, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
        init_dense(store, f"{name}.l{index}", rng, fan_in, fan_out)


def mlp(store, name, x, depth):
    """tanh hidden layers, linear output."""
    for index in range(1, depth + 1):
        x = dense(store, f"{name}.l{index}", x)
        if index < depth:
            x = ops.tanh(x)
    return x


def broadcast_to(x, shape):
    """Differentiable broadcast of ``x`` to ``shape`` (gradients are summed back)."""
    return ops.multiply(np.ones(shape), x)
