"""
Tests for the differentiable primitives.
"""
import numpy as np
import pytest

from src.errors import DomainError, ShapeError
from src.tensor import ops
from src.tensor.autograd import backward, variable
from src.tensor.gradcheck import grad_check


class TestForward:
    """
    Forward values of the primitives.
    """

    def test_softmax_of_equal_logits_is_uniform(self):
        """Test softmax([0,0,0]) gives a third each."""
        probs = ops.softmax(np.zeros((1, 3)), axis=1).value
        np.testing.assert_allclose(probs, np.full((1, 3), 1 / 3))

    def test_matmul_identity(self):
        a = np.arange(12, dtype=np.float64).reshape(3, 4)
        np.testing.assert_array_equal(ops.matmul(np.eye(3), a).value, a)

    def test_cross_entropy_uniform_two_classes(self):
        """Test CE of logits [0,0] against class 0 is ln 2."""
        loss = ops.cross_entropy(np.zeros((1, 2)), [0])
        assert loss.item() == pytest.approx(np.log(2.0), abs=1e-12)

    def test_softmax_rows_sum_to_one_for_large_logits(self):
        probs = ops.softmax(np.array([[1000.0, 0.0, -1000.0], [5.0, 5.0, 5.0]]), axis=1).value
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)
        assert np.all(np.isfinite(probs))

    def test_reshape_accepts_minus_one(self):
        out = ops.reshape(np.ones((2, 3, 4)), (2, -1))
        assert out.shape == (2, 12)

    def test_straight_through_forwards_hard_value(self):
        hard = np.array([[1.0, 0.0]])
        out = ops.straight_through(hard, variable([[0.7, 0.3]]))
        np.testing.assert_array_equal(out.value, hard)

    def test_clip_min(self):
        np.testing.assert_array_equal(ops.clip_min(np.array([-1.0, 0.5]), 0.0).value, [0.0, 0.5])


class TestErrors:
    """
    Rejected inputs.
    """

    def test_matmul_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError) as excinfo:
            ops.matmul(np.ones((2, 3)), np.ones((4, 2)))
        assert '(2, 3)' in str(excinfo.value)
        assert '(4, 2)' in str(excinfo.value)

    def test_matmul_rejects_3d(self):
        with pytest.raises(ShapeError):
            ops.matmul(np.ones((2, 2, 2)), np.ones((2, 2)))

    def test_add_rejects_non_broadcastable(self):
        with pytest.raises(ShapeError):
            ops.add(np.ones((2, 3)), np.ones((3, 2)))

    def test_log_of_zero(self):
        with pytest.raises(DomainError):
            ops.log(np.array([1.0, 0.0]))

    def test_concat_mismatch(self):
        with pytest.raises(ShapeError):
            ops.concat([np.ones((2, 3)), np.ones((3, 2))], axis=1)

    def test_gather_rows_out_of_range(self):
        with pytest.raises(ShapeError):
            ops.gather_rows(np.ones((3, 2)), [0, 3])

    def test_cross_entropy_target_out_of_range(self):
        with pytest.raises(ShapeError):
            ops.cross_entropy(np.zeros((1, 2)), [2])

    def test_straight_through_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.straight_through(np.ones((1, 3)), variable(np.ones((1, 2))))


class TestGradients:
    """
    Analytic gradients of the primitives against central differences.
    """

    def test_square_at_three(self):
        """Test d(x*x)/dx = 6 at x = 3."""
        x = variable(3.0)
        backward(ops.multiply(x, x))
        assert x.grad == pytest.approx(6.0)

    def test_tanh_at_zero(self):
        x = variable(0.0)
        backward(ops.tanh(x))
        assert x.grad == pytest.approx(1.0)

    def test_sigmoid_check(self):
        assert grad_check(lambda xs: ops.sigmoid(xs[0]), [np.array(0.0)]) < 1e-8

    def test_softmax_cross_entropy_composite(self):
        rng = np.random.default_rng(0)
        logits = rng.normal(size=(4, 5))

        def f(xs):
            return ops.cross_entropy(ops.log(ops.softmax(xs[0], axis=1)), [0, 1, 2, 3])

        assert grad_check(f, [logits]) < 1e-6

    def test_relu_away_from_kink(self):
        point = np.array([-0.7, 0.3, 1.2, -2.0])
        assert grad_check(lambda xs: ops.sum(ops.relu(xs[0])), [point]) < 1e-8

    def test_broadcast_multiply_and_add(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=(3, 4)), rng.normal(size=(1, 4))

        def f(xs):
            return ops.sum(ops.tanh(ops.add(ops.multiply(xs[0], xs[1]), xs[1])))

        assert grad_check(f, [a, b]) < 1e-7

    def test_structural_primitives(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(3, 4))

        def f(xs):
            gathered = ops.gather_rows(xs[0], [2, 0, 2])
            joined = ops.concat([gathered, ops.transpose(ops.reshape(xs[0], (4, 3)))], axis=0)
            return ops.mean(ops.exp(ops.scale(joined, 0.5)))

        assert grad_check(f, [x]) < 1e-7

    def test_squared_error_and_mask(self):
        rng = np.random.default_rng(3)
        x, y = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
        keep = np.array([[1.0, 0.0, 1.0]])
        assert grad_check(lambda xs: ops.squared_error(ops.mask(xs[0], keep), xs[1]), [x, y]) < 1e-7

    def test_straight_through_routes_gradient_to_soft(self):
        soft = variable([[0.2, 0.8]])
        out = ops.straight_through(np.array([[0.0, 1.0]]), soft)
        backward(ops.sum(ops.multiply(out, np.array([[3.0, 5.0]]))))
        np.testing.assert_array_equal(soft.grad, [[3.0, 5.0]])


def _away_from(values, floor, gap=1e-3):
    """Push entries within ``gap`` of ``floor`` off the kink."""
    near = np.abs(values - floor) < gap
    return np.where(near, floor + np.where(values >= floor, gap, -gap), values)


def _weights(shape):
    return np.linspace(-1.0, 1.0, int(np.prod(shape))).reshape(shape)


PRIMITIVE_CASES = {
    'matmul': (lambda rng: [rng.normal(size=(3, 4)), rng.normal(size=(4, 2))],
               lambda xs: ops.sum(ops.multiply(ops.matmul(xs[0], xs[1]), _weights((3, 2))))),
    'subtract': (lambda rng: [rng.normal(size=(3, 4)), rng.normal(size=(1, 4))],
                 lambda xs: ops.sum(ops.tanh(ops.subtract(xs[0], xs[1])))),
    'log': (lambda rng: [rng.uniform(0.5, 2.0, size=(3, 4))],
            lambda xs: ops.sum(ops.multiply(ops.log(xs[0]), _weights((3, 4))))),
    'sum_axis0': (lambda rng: [rng.normal(size=(3, 4))],
                  lambda xs: ops.sum(ops.tanh(ops.sum(xs[0], axis=0)))),
    'sum_axis1_keepdims': (lambda rng: [rng.normal(size=(3, 4))],
                           lambda xs: ops.sum(ops.multiply(ops.sum(xs[0], axis=1, keepdims=True), xs[0]))),
    'clip_min': (lambda rng: [_away_from(rng.normal(size=(3, 4)), 0.1)],
                 lambda xs: ops.sum(ops.multiply(ops.clip_min(xs[0], 0.1), _weights((3, 4))))),
    'softmax': (lambda rng: [rng.normal(scale=2.0, size=(3, 5))],
                lambda xs: ops.sum(ops.multiply(ops.softmax(xs[0], axis=1), _weights((3, 5))))),
    'softmax_axis0': (lambda rng: [rng.normal(size=(4, 3))],
                      lambda xs: ops.sum(ops.multiply(ops.softmax(xs[0], axis=0), _weights((4, 3))))),
}


class TestPrimitiveGradients:
    """
    Central-difference checks of individual primitives at random points.
    """

    @pytest.mark.parametrize('seed', range(20))
    @pytest.mark.parametrize('name', sorted(PRIMITIVE_CASES))
    def test_random_points(self, name, seed):
        draw, function = PRIMITIVE_CASES[name]
        point = draw(np.random.default_rng(seed))
        assert grad_check(function, point) < 1e-6, name
