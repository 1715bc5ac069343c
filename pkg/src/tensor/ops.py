"""
Differentiable primitives over float64 arrays.

Shape conventions are numpy's. ``add``/``subtract``/``multiply`` broadcast; ``matmul`` is
strictly 2-D; reductions take an ``axis`` (``None`` reduces everything). Plain arrays and
Python scalars are accepted wherever a node is and are treated as constants.
"""
import numpy as np
from scipy.special import expit, logsumexp

from src.errors import DomainError, ShapeError
from src.tensor.autograd import Node, as_array, constant, record


def _node(x):
    return x if isinstance(x, Node) else constant(x)


def _unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


def matmul(a, b):
    """
    Matrix product of two 2-D nodes.

    Args:
        a (Node): (n, k)
        b (Node): (k, m)

    Returns:
        Node: (n, m)

    Raises:
        ShapeError: If either input is not 2-D or the inner sizes differ.
    """
    a, b = _node(a), _node(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.value.shape[1] != b.value.shape[0]:
        raise ShapeError(f"matmul: shapes {a.value.shape} and {b.value.shape} do not conform")

    def backward(g):
        return g @ b.value.T, a.value.T @ g

    return record(a.value @ b.value, 'matmul', (a, b), backward)


def add(a, b):
    a, b = _node(a), _node(b)
    _broadcast_shape('add', a.value, b.value)

    def backward(g):
        return _unbroadcast(g, a.value.shape), _unbroadcast(g, b.value.shape)

    return record(a.value + b.value, 'add', (a, b), backward)


def subtract(a, b):
    a, b = _node(a), _node(b)
    _broadcast_shape('subtract', a.value, b.value)

    def backward(g):
        return _unbroadcast(g, a.value.shape), _unbroadcast(-g, b.value.shape)

    return record(a.value - b.value, 'subtract', (a, b), backward)


def multiply(a, b):
    a, b = _node(a), _node(b)
    _broadcast_shape('multiply', a.value, b.value)

    def backward(g):
        return _unbroadcast(g * b.value, a.value.shape), _unbroadcast(g * a.value, b.value.shape)

    return record(a.value * b.value, 'multiply', (a, b), backward)


def scale(x, factor):
    """Multiply by a Python scalar."""
    x = _node(x)
    factor = float(factor)

    def backward(g):
        return (g * factor,)

    return record(x.value * factor, 'scale', (x,), backward)


def tanh(x):
    x = _node(x)
    y = np.tanh(x.value)

    def backward(g):
        return (g * (1.0 - y * y),)

    return record(y, 'tanh', (x,), backward)


def sigmoid(x):
    x = _node(x)
    y = expit(x.value)

    def backward(g):
        return (g * y * (1.0 - y),)

    return record(y, 'sigmoid', (x,), backward)


def relu(x):
    x = _node(x)
    active = x.value > 0

    def backward(g):
        return (g * active,)

    return record(np.where(active, x.value, 0.0), 'relu', (x,), backward)


def exp(x):
    x = _node(x)
    y = np.exp(x.value)

    def backward(g):
        return (g * y,)

    return record(y, 'exp', (x,), backward)


def log(x):
    """
    Natural logarithm.

    Raises:
        DomainError: If any input value is not strictly positive.
    """
    x = _node(x)
    if np.any(x.value <= 0):
        raise DomainError(f"log: non-positive input (min {x.value.min()!r}, shape {x.value.shape})")

    def backward(g):
        return (g / x.value,)

    return record(np.log(x.value), 'log', (x,), backward)


def clip_min(x, floor):
    """Elementwise max(x, floor); gradient passes only where x > floor."""
    x = _node(x)
    above = x.value > floor

    def backward(g):
        return (g * above,)

    return record(np.where(above, x.value, floor), 'clip_min', (x,), backward)


def sum(x, axis=None, keepdims=False):
    x = _node(x)
    shape = x.value.shape

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return record(np.sum(x.value, axis=axis, keepdims=keepdims), 'sum', (x,), backward)


def mean(x, axis=None, keepdims=False):
    x = _node(x)
    count = x.value.size if axis is None else x.value.shape[axis]
    return scale(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def softmax(x, axis=-1):
    """Softmax along ``axis``; rows sum to 1."""
    x = _node(x)
    y = np.exp(x.value - logsumexp(x.value, axis=axis, keepdims=True))

    def backward(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return record(y, 'softmax', (x,), backward)


def concat(nodes, axis=0):
    """
    Concatenate nodes along ``axis``.

    Raises:
        ShapeError: If the non-concatenated dimensions differ.
    """
    nodes = [_node(n) for n in nodes]
    try:
        value = np.concatenate([n.value for n in nodes], axis=axis)
    except ValueError:
        shapes = ', '.join(str(n.value.shape) for n in nodes)
        raise ShapeError(f"concat along axis {axis}: shapes {shapes} do not conform") from None
    bounds = np.cumsum([n.value.shape[axis] for n in nodes])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return record(value, 'concat', tuple(nodes), backward)


def gather_rows(x, indices):
    """
    Select rows (entries along axis 0) by an index list; repeats allowed.

    Args:
        x (Node): (n, ...)
        indices (array-like of int): Row indices in [0, n).

    Returns:
        Node: (len(indices), ...)
    """
    x = _node(x)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 1:
        raise ShapeError(f"gather_rows: index list must be 1-D, got shape {indices.shape}")
    if indices.size and (indices.min() < 0 or indices.max() >= x.value.shape[0]):
        raise ShapeError(f"gather_rows: indices out of range for shape {x.value.shape}")

    def backward(g):
        out = np.zeros_like(x.value)
        np.add.at(out, indices, g)
        return (out,)

    return record(x.value[indices], 'gather_rows', (x,), backward)


def mask(x, keep):
    """Multiply by a constant 0/1 mask (broadcastable to ``x``)."""
    x = _node(x)
    keep = as_array(keep)
    _broadcast_shape('mask', x.value, keep)

    def backward(g):
        return (_unbroadcast(g * keep, x.value.shape),)

    return record(x.value * keep, 'mask', (x,), backward)


def squared_error(prediction, target):
    """Mean of squared differences; both sides receive gradients."""
    prediction, target = _node(prediction), _node(target)
    if prediction.value.shape != target.value.shape:
        raise ShapeError(
            f"squared_error: shapes {prediction.value.shape} and {target.value.shape} differ")
    diff = prediction.value - target.value
    n = diff.size

    def backward(g):
        grad = g * 2.0 * diff / n
        return grad, -grad

    return record(np.array(np.mean(diff * diff)), 'squared_error', (prediction, target), backward)


def cross_entropy(logits, targets):
    """
    Mean categorical cross-entropy of rows of logits against integer class targets.

    Args:
        logits (Node): (n, classes)
        targets (array-like of int): (n,)

    Returns:
        Node: scalar
    """
    logits = _node(logits)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if logits.value.ndim != 2 or logits.value.shape[0] != targets.shape[0]:
        raise ShapeError(
            f"cross_entropy: logits shape {logits.value.shape} and targets shape {targets.shape} differ")
    n, classes = logits.value.shape
    if targets.size and (targets.min() < 0 or targets.max() >= classes):
        raise ShapeError(f"cross_entropy: target out of range for {classes} classes")
    log_z = logsumexp(logits.value, axis=1)
    rows = np.arange(n)
    loss = np.mean(log_z - logits.value[rows, targets])

    def backward(g):
        probs = np.exp(logits.value - log_z[:, None])
        probs[rows, targets] -= 1.0
        return (g * probs / n,)

    return record(np.array(loss), 'cross_entropy', (logits,), backward)


def reshape(x, shape):
    x = _node(x)
    original = x.value.shape
    try:
        value = x.value.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view shape {original} as {tuple(shape)}") from None

    def backward(g):
        return (g.reshape(original),)

    return record(value, 'reshape', (x,), backward)


def transpose(x, axes=None):
    x = _node(x)
    axes = tuple(reversed(range(x.value.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return record(np.transpose(x.value, axes), 'transpose', (x,), backward)


def straight_through(hard, soft):
    """
    Forward ``hard`` exactly, backward route the gradient to ``soft``.

    Args:
        hard (numpy.ndarray): Discrete forward value.
        soft (Node): Smooth surrogate of the same shape.
    """
    soft = _node(soft)
    hard = as_array(hard)
    if hard.shape != soft.value.shape:
        raise ShapeError(f"straight_through: shapes {hard.shape} and {soft.value.shape} differ")

    def backward(g):
        return (g,)

    return record(hard.copy(), 'straight_through', (soft,), backward)
