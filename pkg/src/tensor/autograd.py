"""
Define-by-run reverse-mode differentiation.

Every primitive in ``src.tensor.ops`` returns a ``Node`` holding its float64 value, the
nodes it was computed from and a closure mapping the output gradient to parent
gradients. The graph is rebuilt on every forward pass and never cached.
"""
import itertools
from contextlib import contextmanager

import numpy as np

from src.errors import ShapeError

_ids = itertools.count()
_recording = True


class Node:
    """
    A recorded value in the computation graph.

    Attributes:
        id (int): Creation order; parents always have smaller ids than their children.
        value (numpy.ndarray): float64 array.
        op (str): Name of the primitive that produced the node ('leaf', 'param', ...).
        parents (tuple): Parent nodes.
        requires_grad (bool): Whether gradients flow into this node.
        param_name (str): Parameter-store path for parameter leaves, else None.
        grad (numpy.ndarray): Accumulated gradient for non-parameter leaves after backward.
    """

    __slots__ = ('id', 'value', 'op', 'parents', 'requires_grad', 'param_name', 'grad', '_backward')

    def __init__(self, value, op='leaf', parents=(), backward_fn=None, requires_grad=False, param_name=None):
        self.id = next(_ids)
        self.value = value
        self.op = op
        self.parents = parents
        self.requires_grad = requires_grad
        self.param_name = param_name
        self.grad = None
        self._backward = backward_fn

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        return float(self.value.reshape(-1)[0])

    def __repr__(self):
        return f"Node(id={self.id}, op={self.op}, shape={self.value.shape})"


def as_array(value):
    """Convert to a float64 numpy array without copying when possible."""
    return np.asarray(value, dtype=np.float64)


def constant(value):
    """Wrap a value as a node that receives no gradient."""
    return Node(as_array(value), op='const')


def variable(value):
    """Wrap a value as a gradient-receiving leaf (used for inputs under test)."""
    return Node(np.array(value, dtype=np.float64), op='leaf', requires_grad=_recording)


def parameter(value, name):
    """Wrap a parameter-store entry as a gradient-receiving leaf."""
    return Node(value, op='param', requires_grad=_recording, param_name=name)


def stop_gradient(node):
    """Return a constant node carrying the value of ``node``."""
    return constant(node.value)


def record(value, op, parents, backward_fn):
    """
    Create the output node of a primitive.

    Args:
        value (numpy.ndarray): Forward value.
        op (str): Primitive name.
        parents (tuple): Input nodes.
        backward_fn (callable): Maps the output gradient to a tuple of parent gradients
            (``None`` entries for parents that get nothing).

    Returns:
        Node: The recorded node. Outside recording, or when no parent needs a gradient,
        the node is a constant.
    """
    if _recording and any(p.requires_grad for p in parents):
        return Node(value, op=op, parents=parents, backward_fn=backward_fn, requires_grad=True)
    return Node(value, op=op)


@contextmanager
def no_grad():
    """Disable graph recording inside the block."""
    global _recording
    previous = _recording
    _recording = False
    try:
        yield
    finally:
        _recording = previous


def _reachable(root):
    seen = {root.id: root}
    stack = [root]
    while stack:
        node = stack.pop()
        for parent in node.parents:
            if parent.id not in seen and parent.requires_grad:
                seen[parent.id] = parent
                stack.append(parent)
    return sorted(seen.values(), key=lambda n: n.id)


def backward(root, store=None):
    """
    Back-propagate from a scalar root.

    Args:
        root (Node): Scalar-shaped node.
        store (ParameterStore, optional): When given, every trainable entry appears in the
            result, with zeros for parameters the root does not reach.

    Returns:
        dict: parameter name -> gradient array. Non-parameter leaves receive their
        gradient in ``node.grad``.

    Raises:
        ShapeError: If the root is not scalar-shaped.
    """
    if root.value.size != 1:
        raise ShapeError(f"backward needs a scalar root, got shape {root.value.shape}")

    result = {}
    if store is not None:
        for name in store.trainable_names():
            result[name] = np.zeros_like(store.value(name))

    if not root.requires_grad:
        return result

    pending = {root.id: np.ones_like(root.value)}
    for node in reversed(_reachable(root)):
        grad = pending.pop(node.id, None)
        if grad is None:
            continue
        if node.param_name is not None:
            if node.param_name in result:
                result[node.param_name] = result[node.param_name] + grad
            else:
                result[node.param_name] = grad.copy()
            continue
        if not node.parents:
            node.grad = grad if node.grad is None else node.grad + grad
            continue
        parent_grads = node._backward(grad)
        for parent, parent_grad in zip(node.parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent.id in pending:
                pending[parent.id] = pending[parent.id] + parent_grad
            else:
                pending[parent.id] = parent_grad
    return result
