import numpy as np
import pytest

from ksampler.autodiff import Adam, Graph, RMSprop, Tensor, ops, parameter
from ksampler.errors import ValidationError


def test_adam_zero_gradient_no_move():
    p = parameter([1.0, -2.0])
    p.grad = np.zeros(2)
    before = p.data.copy()
    Adam([p]).step()
    assert np.array_equal(p.data, before)


def test_adam_single_step_closed_form():
    p = parameter([0.0])
    p.grad = np.ones(1)
    Adam([p], lr=1e-3).step()
    # one-step closed form: mhat = 1, vhat = 1
    assert p.data[0] == pytest.approx(-1e-3, rel=1e-6)


def test_rmsprop_zero_gradient_no_move():
    p = parameter([3.0])
    p.grad = np.zeros(1)
    RMSprop([p]).step()
    assert p.data[0] == 3.0


def test_missing_gradient_raises():
    p = parameter([1.0])
    with pytest.raises(ValidationError):
        Adam([p]).step()
    with pytest.raises(ValidationError):
        RMSprop([p]).step()


def test_grads_zeroed_after_step():
    p = parameter([1.0])
    p.grad = np.ones(1)
    Adam([p]).step()
    assert p.grad is None
    p.grad = np.ones(1)
    RMSprop([p]).step()
    assert p.grad is None


@pytest.mark.parametrize("opt_cls", [Adam, RMSprop])
def test_optimizer_trajectory_deterministic(opt_cls):
    def run():
        rng = np.random.default_rng(11)
        p = parameter(rng.standard_normal(4))
        opt = opt_cls([p])
        for _ in range(25):
            with Graph() as g:
                loss = ops.sum_all(ops.mul(p, p))
            g.backward(loss)
            opt.step()
        return p.data.copy()

    a, b = run(), run()
    assert np.array_equal(a, b)


def test_rmsprop_descends_quadratic():
    p = parameter([5.0])
    opt = RMSprop([p], lr=1e-2)
    for _ in range(200):
        with Graph() as g:
            loss = ops.scale(ops.sum_all(ops.mul(p, p)), 0.5)
        g.backward(loss)
        opt.step()
    assert abs(p.data[0]) < 5.0
