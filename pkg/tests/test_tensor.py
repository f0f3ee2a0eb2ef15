import numpy as np
import pytest

from habitmotion.nk import tensor as T
from habitmotion.nk.gradcheck import gradcheck, make_inputs
from habitmotion.nk.tensor import Parameter, Tensor, backward


def test_sum_of_squares_gradient():
    p = Tensor([1.0, 2.0], requires_grad=True)
    loss = (p * p).sum()
    loss.backward()
    assert np.allclose(p.grad, [2.0, 4.0])


def test_backward_requires_scalar():
    p = Tensor([1.0, 2.0], requires_grad=True)
    with pytest.raises(ValueError):
        (p * p).backward()


def test_disconnected_parameter_warns_and_zeroes():
    a = Parameter(np.ones(3), "a")
    b = Parameter(np.ones(3), "b")
    loss = (a * a).sum()
    with pytest.warns(UserWarning, match="disconnected"):
        backward(loss, [a, b])
    assert np.allclose(b.grad, 0.0)
    assert np.allclose(a.grad, 2.0)


def test_constant_loss_has_zero_gradient():
    p = Parameter(np.ones(4), "p")
    loss = Tensor(np.zeros(1)) + p.detach().sum()
    with pytest.warns(UserWarning):
        backward(loss, [p])
    assert np.allclose(p.grad, 0.0)


def test_non_finite_rejected_at_construction():
    with pytest.raises(ValueError, match="non-finite"):
        Tensor([1.0, np.inf])
    with pytest.raises(ValueError, match="non-finite"):
        Tensor([np.nan])


def test_no_grad_suppresses_graph():
    p = Parameter(np.ones(3), "p")
    with T.no_grad():
        out = (p * p).sum()
    assert not out.requires_grad
    assert out._parents == ()


def test_broadcasting_gradients():
    err = gradcheck(
        lambda a, b: ((a + b) * (a * b)).sum(),
        make_inputs(0, (3, 4), (4,)),
    )
    assert err < 1e-6


@pytest.mark.parametrize(
    "fn",
    [
        lambda x: T.exp(x).sum(),
        lambda x: T.log(x * x + 1.0).sum(),
        lambda x: T.sqrt(x * x + 0.5).sum(),
        lambda x: T.tanh(x).sum(),
        lambda x: T.softplus(x).sum(),
        lambda x: (T.relu(x) * T.relu(x)).sum(),
        lambda x: (x ** 3.0).mean(),
        lambda x: (x / (x * x + 2.0)).sum(),
        lambda x: T.softmax(x, axis=-1).reshape((12,))[::2].sum(),
        lambda x: T.log_softmax(x, axis=-1).mean(),
        lambda x: x.transpose((1, 0)).reshape((12,)).sum(axis=0),
        lambda x: x.mean(axis=1).sum(),
    ],
)
def test_elementwise_and_structural_gradients(fn):
    (x,) = make_inputs(7, (3, 4), offset=0.3)
    assert gradcheck(fn, [x]) < 1e-6


def test_concat_and_index_rows_gradients():
    a, b = make_inputs(3, (2, 3), (4, 3))

    def fn(a, b):
        joined = T.concat([a, b], axis=0)
        picked = T.index_rows(joined, [0, 2, 2, 5])
        return (picked * picked).sum()

    assert gradcheck(fn, [a, b]) < 1e-6


def test_straight_through_copies_gradient():
    f = Tensor([1.0, 2.0], requires_grad=True)
    fhat = Tensor([10.0, 20.0])
    out = T.straight_through(f, fhat)
    assert np.allclose(out.data, [10.0, 20.0])
    (out * out).sum().backward()
    # gradient of sum(fhat^2) w.r.t. fhat, routed onto f
    assert np.allclose(f.grad, [20.0, 40.0])


def test_matmul_batched_gradcheck():
    a, b = make_inputs(9, (2, 3, 4), (4, 5))
    assert gradcheck(lambda a, b: (T.matmul(a, b) ** 2.0).sum(), [a, b]) < 1e-6
